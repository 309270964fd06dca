from django.core.management import CommandError

from linopt.management.base import VERIFICATION_FAILURE, SimulatorCommand, usage_error
from linopt.verification import claim_names, run_claims


class Command(SimulatorCommand):
    help = "Run the closed-form vs simulation cross-checks and report each residual"
    columns = ['claim', 'description', 'residual', 'tolerance', 'passed']

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--tolerance', type=float, default=None,
                            help="Replace every claim's tolerance with this value")
        parser.add_argument('--claim', action='append', dest='claims', default=None, metavar='NAME',
                            help="Run only this claim (repeatable)")

    def handle(self, *args, **options):
        names = options['claims']
        if names:
            unknown = sorted(set(names) - set(claim_names()))
            if unknown:
                raise usage_error(f"unknown claims {', '.join(unknown)}; known: {', '.join(claim_names())}")
        if options['tolerance'] is not None and options['tolerance'] < 0:
            raise usage_error(f"--tolerance must be non-negative, got {options['tolerance']}")

        results = run_claims(options['seed'], options['tolerance'], names, jobs=options['jobs'])
        rows = [{
            'claim': result.name,
            'description': result.description,
            'residual': result.residual,
            'tolerance': result.tolerance,
            'passed': result.passed,
        } for result in results]
        self.emit(rows, options)

        failed = [result.name for result in results if not result.passed]
        if failed:
            raise CommandError(f"{len(failed)} of {len(results)} claims failed: {', '.join(failed)}",
                               returncode=VERIFICATION_FAILURE)
        self.stderr.write(self.style.SUCCESS(f"All {len(results)} claims passed"))
