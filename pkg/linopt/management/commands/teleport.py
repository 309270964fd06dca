import logging
import math
from itertools import product

from linopt import teleport
from linopt.management.base import SimulatorCommand, radians, usage_error
from linopt.models import BlochMethod, DetectorKind, EventSet, TeleportParams

logger = logging.getLogger(__name__)


def _event_set(text: str) -> str:
    return 'both' if text.lower() == 'both' else text.upper()


class Command(SimulatorCommand):
    help = "Averaged fidelity and success probability of conditional teleportation over a W network"
    grid_columns = ['N', 'm', 'eta', 'theta', 'detector', 'events', 'avg_fidelity', 'avg_probability',
                    'r_theta', 'rprime_theta', 'optimal', 'sim_fidelity', 'sim_probability', 'residual_fidelity',
                    'residual_probability', 'beats_classical']
    critical_columns = ['N', 'm', 'detector', 'critical_eta', 'method', 'bisection_eta', 'residual']

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--N', type=int, nargs='+', required=True, help="Network sizes")
        parser.add_argument('--m', type=int, nargs='+', default=None,
                            help="Cooperating parties (default: every m in [0, N-2])")
        parser.add_argument('--eta', type=float, nargs='+', default=[1.0], help="Detector efficiencies")
        parser.add_argument('--theta', nargs='+', default=None,
                            help="Bell-splitter angles in radians, within [0, pi/2] (default: pi/4)")
        parser.add_argument('--events', type=_event_set, choices=EventSet.values, default=EventSet.D10,
                            help="Accepted Bell events")
        parser.add_argument('--detector', choices=DetectorKind.values, default=DetectorKind.NUMBER_RESOLVING)
        parser.add_argument('--bloch', choices=BlochMethod.values, default=BlochMethod.MOMENTS,
                            help="How the Bloch-sphere average is taken")
        parser.add_argument('--no-simulate', action='store_true',
                            help="Skip the full-circuit cross-check columns")
        mode = parser.add_mutually_exclusive_group()
        mode.add_argument('--optimize', action='store_true', help="Report the optimal angle instead of a theta grid")
        mode.add_argument('--critical-eta', action='store_true',
                          help="Report the critical efficiency for every (N, m)")

    def handle(self, *args, **options):
        self.columns = self.critical_columns if options['critical_eta'] else self.grid_columns
        kind = DetectorKind(options['detector'])
        event_set = EventSet(options['events'])
        pairs = self._network_grid(options['N'], options['m'])

        if options['critical_eta']:
            rows = self.run_ordered(lambda item: self._critical_row(*item, kind), pairs, options['jobs'])
            self.emit(rows, options)
            return

        for eta in options['eta']:
            if not 0 < eta <= 1:
                raise usage_error(f"eta must lie in (0, 1], got {eta}")
        if options['optimize']:
            if options['theta'] is not None:
                raise usage_error("--optimize chooses theta itself; drop --theta")
            thetas = [None]
        else:
            thetas = [radians(text) for text in options['theta'] or [repr(math.pi / 4)]]
            for theta in thetas:
                if not 0 <= theta <= math.pi / 2 + 1e-12:
                    raise usage_error(f"theta must lie in [0, pi/2] radians, got {theta}")

        seed = options['seed']
        method = BlochMethod(options['bloch'])
        simulate = not options['no_simulate']
        grid = [(N, m, eta, theta) for (N, m), eta, theta in product(pairs, options['eta'], thetas)]

        def grid_row(item):
            N, m, eta, theta = item
            return self._grid_row(N, m, eta, theta, kind, event_set, method, simulate, seed)

        self.emit(self.run_ordered(grid_row, grid, options['jobs']), options)

    @staticmethod
    def _network_grid(sizes, cooperating):
        pairs = []
        for N in sizes:
            if N < 2:
                raise usage_error(f"N must be at least 2, got {N}")
            ms = range(N - 1) if cooperating is None else cooperating
            for m in ms:
                if not 0 <= m <= N - 2:
                    raise usage_error(f"m must lie in [0, N-2] = [0, {N - 2}] for N={N}, got {m}")
                pairs.append((N, m))
        return pairs

    def _grid_row(self, N, m, eta, theta, kind, event_set, method, simulate, seed):
        if theta is None:
            report = teleport.optimized_report(N, m, eta, kind, event_set)
        else:
            report = teleport.averaged_fidelity_probability(TeleportParams(N, m, eta, theta, kind, event_set),
                                                            method, seed=seed)
        params = report.params

        row = {
            'N': N, 'm': m, 'eta': eta, 'theta': params.theta,
            'detector': kind.value, 'events': event_set.value,
            'avg_fidelity': report.avg_fidelity,
            'avg_probability': report.avg_probability,
            'r_theta': report.r_theta,
            'rprime_theta': report.rprime_theta,
            'optimal': report.optimal,
            'beats_classical': report.avg_fidelity > teleport.CLASSICAL_LIMIT,
        }
        if simulate:
            sim_fidelity, sim_probability = teleport.simulated_average(params)
            row.update({
                'sim_fidelity': sim_fidelity,
                'sim_probability': sim_probability,
                'residual_fidelity': abs(sim_fidelity - report.avg_fidelity),
                'residual_probability': abs(sim_probability - report.avg_probability),
            })
        logger.debug(f"Teleport row {row}")
        return row

    @staticmethod
    def _critical_row(N, m, kind):
        closed = teleport.critical_eta(N, m, kind)
        if kind == DetectorKind.NUMBER_RESOLVING:
            check = teleport.critical_eta_bisection(N, m, kind)
        else:
            check = teleport.critical_eta_grid(N, m, kind)
        return {
            'N': N, 'm': m, 'detector': kind.value,
            'critical_eta': closed,
            'method': 'closed_form' if kind == DetectorKind.NUMBER_RESOLVING else 'bisection',
            'bisection_eta': check,
            'residual': abs(closed - check),
        }

