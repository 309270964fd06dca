import json
import math
import os
from typing import Iterable, List, Mapping, TextIO

import pandas as pd


class ResultWriter(object):
    """Tabular results to CSV or JSON, stamped with the schema version.

    CSV carries ``schema_version`` as its first column; JSON is one object
    with ``schema_version``, ``config`` and ``rows``. Floats are written with
    17 significant digits in both formats.
    """
    _schema_version = None
    _config = None
    _columns = None

    def __init__(self, schema_version: str, config: Mapping, columns: List[str]):
        self._schema_version = schema_version
        self._config = dict(config)
        self._columns = list(columns)

    def toDataframe(self, rows: Iterable[Mapping]) -> pd.DataFrame:
        df = pd.DataFrame(list(rows), columns=self._columns)
        df.insert(0, 'schema_version', self._schema_version)
        return df

    def renderCsv(self, rows: Iterable[Mapping]) -> str:
        return self.toDataframe(rows).to_csv(index=False, float_format='%.17g', lineterminator='\r\n')

    def renderJson(self, rows: Iterable[Mapping]) -> str:
        df = self.toDataframe(rows).drop(columns='schema_version')
        records = df.astype(object).where(df.notna(), None).to_dict(orient='records')
        document = {
            'schema_version': self._schema_version,
            'config': self._config,
            'rows': [{key: _native(value) for key, value in record.items()} for record in records],
        }
        return json.dumps(document, indent=2, default=_native) + '\n'

    def render(self, rows: Iterable[Mapping], fmt: str = 'csv') -> str:
        if fmt == 'json':
            return self.renderJson(rows)
        return self.renderCsv(rows)

    def write(self, rows: Iterable[Mapping], fmt: str, path: str = None, stream: TextIO = None) -> str:
        text = self.render(rows, fmt)
        if path:
            directory = os.path.dirname(os.path.abspath(path))
            os.makedirs(directory, exist_ok=True)
            with open(path, 'w', newline='') as output:
                output.write(text)
        elif stream is not None:
            stream.write(text)
        return text


def _native(value):
    if hasattr(value, 'item'):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)
