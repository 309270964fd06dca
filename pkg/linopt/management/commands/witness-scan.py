from linopt.detection import DetectorModel
from linopt.management.base import SimulatorCommand, coefficients_from_options, usage_error
from linopt.models import DetectorKind
from linopt.witness import scan_all_pairs


class Command(SimulatorCommand):
    help = "Pairwise separability test on every pair of modes of a W state under lossy detection"
    columns = ['row_type', 'i', 'j', 'p_ij', 'ratio_closed', 'ratio_sim', 'lhs', 'rhs', 'negativity', 'violated',
               'all_violated', 'reason']

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--symmetric', type=int, metavar='N', help="Symmetric W state on N modes")
        parser.add_argument('--coeffs', help="Comma-separated amplitudes a1,a2,... (complex literals allowed)")
        parser.add_argument('--eta', type=float, default=1.0, help="Detector quantum efficiency in (0, 1]")
        parser.add_argument('--detector', choices=DetectorKind.values, default=None,
                            help="Count moments from this detector's outcome statistics "
                                 "(default: loss transform of the ideal moments)")

    def handle(self, *args, **options):
        eta = options['eta']
        if eta == 0:
            raise usage_error("eta = 0 means no photon is ever detected: the moments vanish and "
                              "the witness cannot test anything")
        if not 0 < eta <= 1:
            raise usage_error(f"eta must lie in (0, 1], got {eta}")
        coefficients = coefficients_from_options(options)
        kind = DetectorKind(options['detector']) if options['detector'] else None

        report = scan_all_pairs(coefficients, DetectorModel(eta), kind)
        rows = [{
            'row_type': 'pair',
            'i': i + 1,
            'j': j + 1,
            'p_ij': result.p_ij,
            'ratio_closed': result.closed_form_ratio,
            'ratio_sim': result.ratio,
            'lhs': result.lhs,
            'rhs': result.rhs,
            'negativity': result.negativity,
            'violated': result.violated,
            'all_violated': None,
            'reason': result.reason,
        } for result in report.pairs for i, j in [result.pair]]
        rows.append({'row_type': 'summary', 'all_violated': report.all_violated, 'reason': report.conclusion})
        self.emit(rows, options)
        if int(options['verbosity']) > 1:
            self.stderr.write(report.conclusion)
