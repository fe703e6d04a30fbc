"""JSON interchange handler for GKM graphs.

This module handles:
- Loading the graph interchange format (UTF-8 JSON) into a GkmGraph
- Optional edge geometry ("length", "chern") and fixed-component data ("fiber")
- Forward-compatible handling of unknown fields (warn, or reject in strict mode)
- Deterministic dumping, so identical inputs give byte-identical files

Format (see docs/GRAPH_FORMAT.md):
    {"rank": n, "vertices": [...], "edges": [{"from": v, "to": w, "weight": [...],
     "length": "p/q", "chern": [...]}], "chern_rank": m2, "fiber": [b0, b1, ...]}
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, StrictInt, ValidationError

from cohomology_solver import FiberData
from connection_chern import EdgeGeometry
from exact_algebra import render_rational
from gkm_errors import GraphParseError, InvalidFiber, InvalidGeometry
from gkm_graph import GkmGraph

logger = logging.getLogger(__name__)


# ============================================================================
# SCHEMA
# ============================================================================

class EdgeRecord(BaseModel):
    """One unoriented edge; weight is alpha for the from -> to orientation."""
    model_config = ConfigDict(extra="allow", populate_by_name=True)

    source: str = Field(alias="from")
    target: str = Field(alias="to")
    weight: List[StrictInt]
    length: Optional[Union[StrictInt, str]] = None
    chern: Optional[List[StrictInt]] = None


class GraphDocument(BaseModel):
    """Top-level interchange object."""
    model_config = ConfigDict(extra="allow")

    rank: StrictInt
    vertices: List[str]
    edges: List[EdgeRecord]
    chern_rank: Optional[StrictInt] = None
    fiber: Optional[List[StrictInt]] = None


@dataclass
class LoadedGraph:
    """Graph plus whatever optional data the file carried."""
    graph: GkmGraph
    geometry: Optional[EdgeGeometry] = None
    fiber: Optional[FiberData] = None
    warnings: List[str] = field(default_factory=list)
    source_file: str = "inline"


# ============================================================================
# HANDLER
# ============================================================================

class GraphDataHandler:
    """Reads and writes the graph interchange format."""

    def __init__(self, strict: bool = False):
        """Initialize the handler.

        Args:
            strict: If True, unknown fields are an error instead of a warning
        """
        self.strict = strict

    def ingest_json(self, file_path: Union[str, Path]) -> LoadedGraph:
        """Load an interchange file.

        Raises:
            GraphParseError: unreadable file, invalid JSON, or schema mismatch
            MalformedGraph: dangling endpoints, rank mismatch, self-loops
        """
        file_path = Path(file_path)
        try:
            text = file_path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as e:
            raise GraphParseError(f"cannot read {file_path}: {e}") from None
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise GraphParseError(f"{file_path} is not valid JSON: {e}") from None
        loaded = self.ingest_document(data, source_name=file_path.name)
        logger.info(
            f"Loaded graph from {file_path}: {len(loaded.graph.vertices)} vertices, {len(loaded.graph.edges)} edges"
        )
        return loaded

    def ingest_document(self, data: Any, source_name: str = "inline") -> LoadedGraph:
        """Build a LoadedGraph from an already-parsed JSON object."""
        if not isinstance(data, dict):
            raise GraphParseError(f"{source_name}: top-level JSON value must be an object")
        try:
            document = GraphDocument.model_validate(data)
        except ValidationError as e:
            raise GraphParseError(f"{source_name}: schema mismatch: {e}") from None

        warnings = self._unknown_fields(document)
        if warnings:
            if self.strict:
                raise GraphParseError(f"{source_name}: " + "; ".join(warnings))
            for message in warnings:
                logger.warning(f"{source_name}: {message}")

        graph = GkmGraph.from_edge_list(
            document.rank,
            document.vertices,
            [(edge.source, edge.target, edge.weight) for edge in document.edges],
        )
        fiber = None
        if document.fiber is not None:
            try:
                fiber = FiberData(tuple(document.fiber))
            except InvalidFiber as e:
                raise GraphParseError(f"{source_name}: {e}") from None
        return LoadedGraph(
            graph=graph,
            geometry=self._geometry(graph, document, source_name),
            fiber=fiber,
            warnings=warnings,
            source_file=source_name,
        )

    def _unknown_fields(self, document: GraphDocument) -> List[str]:
        messages = [f"unknown field {name!r} at top level" for name in sorted(document.model_extra or {})]
        for i, edge in enumerate(document.edges):
            messages.extend(f"unknown field {name!r} at edges[{i}]" for name in sorted(edge.model_extra or {}))
        return messages

    def _geometry(self, graph: GkmGraph, document: GraphDocument, source_name: str) -> Optional[EdgeGeometry]:
        has_geometry = any(e.length is not None or e.chern is not None for e in document.edges)
        if not has_geometry and document.chern_rank is None:
            return None
        try:
            return EdgeGeometry.from_records(
                graph,
                {i: e.length for i, e in enumerate(document.edges) if e.length is not None},
                {i: e.chern for i, e in enumerate(document.edges) if e.chern is not None},
                chern_rank=document.chern_rank,
            )
        except ValueError as e:
            raise GraphParseError(f"{source_name}: bad edge length: {e}") from None
        except InvalidGeometry as e:
            raise GraphParseError(f"{source_name}: {e}") from None

    # ===== OUTPUT =====

    def to_document(
        self,
        graph: GkmGraph,
        geometry: Optional[EdgeGeometry] = None,
        fiber: Optional[FiberData] = None,
    ) -> Dict[str, Any]:
        """Interchange object for a graph and optional geometry/fiber data."""
        edges = []
        for e in graph.edges:
            record: Dict[str, Any] = {
                "from": e.source,
                "to": e.target,
                "weight": list(e.weight.coefficients),
            }
            if geometry is not None:
                if geometry.lengths[e.index] is not None:
                    record["length"] = render_rational(geometry.lengths[e.index])
                if geometry.cherns[e.index] is not None:
                    record["chern"] = list(geometry.cherns[e.index])
            edges.append(record)
        document: Dict[str, Any] = {"rank": graph.rank, "vertices": list(graph.vertices), "edges": edges}
        if geometry is not None:
            document["chern_rank"] = geometry.chern_rank
        if fiber is not None:
            document["fiber"] = list(fiber.poincare)
        return document

    def dump_json(
        self,
        graph: GkmGraph,
        geometry: Optional[EdgeGeometry] = None,
        fiber: Optional[FiberData] = None,
    ) -> str:
        """Deterministic JSON text (two-space indent, trailing newline)."""
        return json.dumps(self.to_document(graph, geometry, fiber), indent=2) + "\n"

    def write_json(
        self,
        file_path: Union[str, Path],
        graph: GkmGraph,
        geometry: Optional[EdgeGeometry] = None,
        fiber: Optional[FiberData] = None,
    ) -> Path:
        file_path = Path(file_path)
        file_path.write_text(self.dump_json(graph, geometry, fiber), encoding="utf-8")
        logger.info(f"Wrote graph to {file_path}")
        return file_path
