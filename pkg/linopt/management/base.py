"""
Shared plumbing for the simulator commands: output flags, the ordered
worker pool and the exit-code contract (2 for usage errors, 1 for failed
verification).
"""
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Sequence, TypeVar

from django.core.management import BaseCommand, CommandError

from linopt.circuits import WCoefficients
from linopt.conf import get_config
from linopt.exceptions import LinoptError
from utils.ResultWriter import ResultWriter

logger = logging.getLogger(__name__)

USAGE_ERROR = 2
VERIFICATION_FAILURE = 1

T = TypeVar('T')
R = TypeVar('R')

_DEGREE_MARKERS = re.compile(r'(deg|degrees?|°)\s*$', re.IGNORECASE)


def usage_error(message: str) -> CommandError:
    return CommandError(message, returncode=USAGE_ERROR)


def radians(text: str) -> float:
    """Angle in radians; explicit degree input is refused."""
    if _DEGREE_MARKERS.search(text):
        raise usage_error(f"angles are given in radians, not degrees: {text!r}")
    try:
        return float(text)
    except ValueError:
        raise usage_error(f"not an angle in radians: {text!r}")


def parse_coefficients(text: str) -> WCoefficients:
    """Comma-separated amplitudes, real or Python complex literals (``0.6,0.8j``)."""
    try:
        alphas = tuple(complex(item.strip().replace(' ', '')) for item in text.split(','))
    except ValueError:
        raise usage_error(f"malformed coefficient list {text!r}: expected comma-separated numbers")
    try:
        return WCoefficients(alphas)
    except LinoptError as e:
        raise usage_error(str(e))


def coefficients_from_options(options) -> WCoefficients:
    if options.get('symmetric') is not None and options.get('coeffs') is not None:
        raise usage_error("give either --symmetric or --coeffs, not both")
    if options.get('coeffs') is not None:
        return parse_coefficients(options['coeffs'])
    if options.get('symmetric') is not None:
        try:
            return WCoefficients.symmetric(options['symmetric'])
        except LinoptError as e:
            raise usage_error(str(e))
    raise usage_error("one of --symmetric N or --coeffs a1,a2,... is required")


class SimulatorCommand(BaseCommand):
    """Base for commands that emit a table of rows."""
    columns: Sequence[str] = ()
    _ignored_options = {'verbosity', 'settings', 'pythonpath', 'traceback', 'no_color', 'force_color',
                        'skip_checks', 'json', 'output'}

    def add_arguments(self, parser):
        parser.add_argument('--output', '-o', help="Write results to this file instead of stdout")
        parser.add_argument('--format', choices=['csv', 'json'], default='csv', help="Output format")
        parser.add_argument('--json', action='store_true', help="Shortcut for --format json")
        parser.add_argument('--seed', type=int, default=None, help="Seed for every random stream")
        parser.add_argument('--jobs', type=int, default=1, help="Worker threads for grid points")

    def run_ordered(self, func: Callable[[T], R], items: Iterable[T], jobs: int) -> List[R]:
        """Apply func to every item; results keep the order of the items."""
        items = list(items)
        if jobs < 1:
            raise usage_error(f"--jobs must be at least 1, got {jobs}")
        if jobs == 1:
            return [func(item) for item in items]
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(func, items))

    def run_config(self, options) -> dict:
        config = get_config()
        recorded = {key: value for key, value in options.items() if key not in self._ignored_options}
        recorded['format'] = self.output_format(options)
        recorded['seed'] = config.default_seed if options.get('seed') is None else options['seed']
        recorded['total_cutoff'] = config.total_cutoff
        return recorded

    @staticmethod
    def output_format(options) -> str:
        return 'json' if options.get('json') else options.get('format', 'csv')

    def emit(self, rows: Iterable[dict], options) -> str:
        writer = ResultWriter(get_config().schema_version, self.run_config(options), list(self.columns))
        text = writer.write(list(rows), self.output_format(options), options.get('output'), self.stdout)
        if options.get('output'):
            self.stderr.write(self.style.SUCCESS(f"Results written to {options['output']}"))
        return text

    def execute(self, *args, **options):
        try:
            return super().execute(*args, **options)
        except LinoptError as e:
            raise usage_error(f"{e.__class__.__name__}: {e}")
