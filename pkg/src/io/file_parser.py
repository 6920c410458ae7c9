"""
File parser for qgm
Supports: matrix / SampleSet / Poly / ideal / RunRecord JSON, edge lists, Pauli word lists
"""

import json
import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Union

from src.core.graphs import builtin_graph, make_graph
from src.models import IdealPresentation, PauliWord, Poly, RunRecord, SampleSet, SymMat
from src.utils.constants import BUILTIN_GRAPHS
from src.utils.errors import GraphError, ParseError, QGMError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class FileParser:
    """Read the documents and text formats used by the qgm command line"""

    SUPPORTED_FORMATS = {
        '.json': 'application/json',
        '.edges': 'text/plain',
        '.paulis': 'text/plain',
        '.txt': 'text/plain',
    }

    JSON_KINDS = ('matrix', 'sampleset', 'poly', 'ideal', 'runrecord')

    def parse(self, file_path: PathLike, kind: Optional[str] = None) -> Any:
        """
        Parse a file, dispatching on its extension.

        Args:
            file_path: Path to file
            kind: Document kind for JSON files; detected from the keys when omitted

        Returns:
            SymMat, SampleSet, Poly, IdealPresentation, RunRecord, Graph or a list of PauliWord
        """
        path = Path(file_path)
        if not path.exists():
            raise ParseError(f"file not found: {file_path}", path=str(file_path))

        ext = path.suffix.lower()
        if ext == '.json':
            return self.parse_json(path, kind)
        elif ext == '.edges':
            return self.parse_graph(path)
        elif ext == '.paulis':
            return self.parse_paulis(path)
        elif kind == 'graph':
            return self.parse_graph(path)
        elif kind == 'paulis':
            return self.parse_paulis(path)
        raise ParseError(f"cannot tell how to read {path.name}; give a .json, .edges or .paulis file",
                         path=str(path))

    # JSON documents

    @staticmethod
    def _load_json(path: Path) -> Dict[str, Any]:
        try:
            with open(path, 'r', encoding='utf-8-sig') as f:
                doc = json.load(f)
        except json.JSONDecodeError as e:
            raise ParseError(f"{path}: invalid JSON ({e.msg})", path=str(path), line=e.lineno) from e
        except OSError as e:
            raise ParseError(f"{path}: {e}", path=str(path)) from e
        if not isinstance(doc, dict):
            raise ParseError(f"{path}: top-level JSON value must be an object", path=str(path))
        return doc

    @staticmethod
    def detect_kind(doc: Dict[str, Any]) -> str:
        if 'rows' in doc and 'n' in doc:
            return 'matrix'
        if 'points' in doc and 'ambient_dim' in doc:
            return 'sampleset'
        if 'generators' in doc:
            return 'ideal'
        if 'terms' in doc and 'n_vars' in doc:
            return 'poly'
        if 'argv' in doc:
            return 'runrecord'
        raise ParseError(f"unrecognised document with keys {sorted(doc)}")

    def parse_json(self, file_path: PathLike, kind: Optional[str] = None) -> Any:
        path = Path(file_path)
        doc = self._load_json(path)
        kind = kind or self.detect_kind(doc)
        readers: Dict[str, Callable[[Dict[str, Any]], Any]] = {
            'matrix': SymMat.from_dict,
            'sampleset': SampleSet.from_dict,
            'poly': Poly.from_dict,
            'ideal': IdealPresentation.from_dict,
            'runrecord': RunRecord.from_dict,
        }
        if kind not in readers:
            raise ParseError(f"unknown document kind {kind!r}; expected one of {self.JSON_KINDS}")
        try:
            return readers[kind](doc)
        except ParseError as e:
            raise ParseError(f"{path}: {e.detail}", path=str(path), kind=kind) from e

    def parse_matrix(self, file_path: PathLike) -> SymMat:
        return self.parse_json(file_path, 'matrix')

    def parse_sample_set(self, file_path: PathLike) -> SampleSet:
        return self.parse_json(file_path, 'sampleset')

    def parse_poly_list(self, file_path: PathLike) -> List[Poly]:
        """A Poly document, an ideal document or a kernel report's basis"""
        path = Path(file_path)
        doc = self._load_json(path)
        try:
            if 'generators' in doc:
                return IdealPresentation.from_dict(doc).generators
            if 'basis' in doc:
                return [Poly.from_dict(p) for p in doc['basis']]
            return [Poly.from_dict(doc)]
        except ParseError as e:
            raise ParseError(f"{path}: {e.detail}", path=str(path)) from e

    def parse_run_record(self, file_path: PathLike) -> RunRecord:
        return self.parse_json(file_path, 'runrecord')

    # Text formats

    @staticmethod
    def _content_lines(path: Path):
        """(line number, stripped text) for lines that are neither blank nor comments"""
        try:
            with open(path, 'r', encoding='utf-8-sig') as f:
                for number, raw in enumerate(f, 1):
                    text = raw.split('#', 1)[0].strip()
                    if text:
                        yield number, text
        except OSError as e:
            raise ParseError(f"{path}: {e}", path=str(path)) from e

    @classmethod
    def parse_graph(cls, file_path: PathLike):
        """
        Edge list: "n=<N>" first, then one 1-based "u v" pair per line.

        Blank lines and '#' comments are ignored.
        """
        path = Path(file_path)
        n_vertices = None
        edges = []
        for number, text in cls._content_lines(path):
            if n_vertices is None:
                key, _, value = text.partition('=')
                if key.strip().lower() != 'n' or not value.strip().isdigit():
                    raise ParseError(f"{path}:{number}: expected 'n=<N>', got {text!r}",
                                     path=str(path), line=number)
                n_vertices = int(value)
                continue
            parts = text.replace(',', ' ').split()
            if len(parts) != 2 or not all(p.isdigit() for p in parts):
                raise ParseError(f"{path}:{number}: expected an edge 'u v', got {text!r}",
                                 path=str(path), line=number)
            edges.append((int(parts[0]), int(parts[1])))
        if n_vertices is None:
            raise ParseError(f"{path}: empty edge list", path=str(path))
        try:
            return make_graph(n_vertices, edges, path.stem)
        except GraphError as e:
            raise ParseError(f"{path}: {e.detail}", path=str(path)) from e

    @classmethod
    def parse_paulis(cls, file_path: PathLike) -> List[PauliWord]:
        """One signed word over I, X, Y, Z per line"""
        path = Path(file_path)
        words = []
        for number, text in cls._content_lines(path):
            try:
                words.append(PauliWord.parse(text))
            except QGMError as e:
                raise ParseError(f"{path}:{number}: {e.detail}", path=str(path), line=number) from e
        if not words:
            raise ParseError(f"{path}: no Pauli words", path=str(path))
        if len({w.n for w in words}) != 1:
            raise ParseError(f"{path}: words have different lengths", path=str(path))
        return words


def load_graph(source: str):
    """A built-in graph name or an edge-list file"""
    if source in BUILTIN_GRAPHS and not Path(source).exists():
        return builtin_graph(source)
    return FileParser.parse_graph(source)
