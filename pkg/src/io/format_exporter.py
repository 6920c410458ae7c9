"""
Format exporter for qgm
Exports to: JSON, CSV, XLSX
"""

import math
from fractions import Fraction
from io import BytesIO
from typing import Any, Dict, Tuple

import numpy as np
import pandas as pd

from src.config import config
from src.models import IdealPresentation, KernelReport, ProjectionResult, SampleSet
from src.utils.constants import EXPORT_FORMATS
from src.utils.errors import ShapeError
from src.utils.helpers import canonical_json_dumps, format_fraction


def to_plain(value: Any) -> Any:
    """Recursively convert to JSON-compatible Python values"""
    if hasattr(value, 'to_dict') and not isinstance(value, pd.DataFrame):
        return to_plain(value.to_dict())
    if isinstance(value, pd.DataFrame):
        return to_plain(value.to_dict(orient='records'))
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_plain(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, Fraction):
        return format_fraction(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    return value


class FormatExporter:
    """Export qgm results in various formats"""

    def export(self, result: Any, output_format: str = 'json') -> bytes:
        """
        Export a result in the specified format.

        Args:
            result: Any object with ``to_dict``, a plain dict or a DataFrame
            output_format: Format ('json', 'csv', 'xlsx')

        Returns:
            Exported data as bytes
        """
        format_lower = output_format.lower().strip('.')

        if format_lower == 'json':
            return self.export_json(result)
        elif format_lower == 'csv':
            return self.export_csv(result)
        elif format_lower == 'xlsx':
            return self.export_xlsx(result)
        else:
            raise ShapeError(f"unsupported format {output_format!r}; choose from {EXPORT_FORMATS}")

    def export_json(self, result: Any) -> bytes:
        """Canonical JSON: sorted keys, repr floats, trailing newline"""
        return canonical_json_dumps(to_plain(result)).encode('utf-8')

    def export_csv(self, result: Any) -> bytes:
        frame, _ = self.to_frame(result)
        precision = int(config.get('export.float_precision', 17))
        text = frame.to_csv(index=False, float_format=f"%.{precision}g")
        return text.encode(config.get('export.csv_encoding', 'utf-8'))

    def export_xlsx(self, result: Any) -> bytes:
        """Data sheet plus a Metadata sheet of key/value pairs"""
        frame, metadata = self.to_frame(result)
        meta = pd.DataFrame(
            [{'key': k, 'value': canonical_json_dumps(to_plain(v)).strip()} for k, v in sorted(metadata.items())],
            columns=['key', 'value'],
        )
        output = BytesIO()
        with pd.ExcelWriter(output, engine='openpyxl') as writer:
            frame.to_excel(writer, sheet_name='Data', index=False)
            meta.to_excel(writer, sheet_name='Metadata', index=False)
        return output.getvalue()

    @staticmethod
    def to_frame(result: Any) -> Tuple[pd.DataFrame, Dict[str, Any]]:
        """Tabular view of a result and the metadata that does not fit in the table"""
        if isinstance(result, pd.DataFrame):
            return result, dict(result.attrs)
        if isinstance(result, SampleSet):
            columns = [f"z{i + 1}" for i in range(result.ambient_dim)]
            return pd.DataFrame(result.points, columns=columns), dict(result.meta)
        if isinstance(result, KernelReport):
            frame = FormatExporter._poly_frame(result.basis)
            meta = {k: v for k, v in result.to_dict().items() if k not in ('basis', 'singular_values')}
            meta['linear_relations'] = [p.to_string() for p in result.linear_relations]
            return frame, meta
        if isinstance(result, IdealPresentation):
            frame = FormatExporter._poly_frame(result.generators, var_prefix='x' if
                                               result.provenance.value == 'toric' else 'y')
            return frame, {'n_vars': result.n_vars, 'provenance': result.provenance.value, **result.metadata}
        if isinstance(result, ProjectionResult):
            n = result.rho_star.shape[0]
            frame = pd.DataFrame(result.rho_star, columns=[f"c{j + 1}" for j in range(n)])
            meta = {k: v for k, v in result.to_dict().items() if k != 'rho_star'}
            return frame, meta
        if isinstance(result, dict):
            return pd.DataFrame([{'key': k, 'value': to_plain(v)} for k, v in sorted(result.items())]), {}
        raise ShapeError(f"no tabular view for {type(result).__name__}")

    @staticmethod
    def _poly_frame(polys, var_prefix: str = 'z') -> pd.DataFrame:
        rows = [{
            'index': i,
            'degree': p.degree,
            'terms': len(p),
            'polynomial': p.to_string(var_prefix),
        } for i, p in enumerate(polys)]
        return pd.DataFrame(rows, columns=['index', 'degree', 'terms', 'polynomial'])

