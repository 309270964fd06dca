import numpy as np

from linopt.circuits import angles_from_coefficients, coefficients_from_angles, generate_w
from linopt.management.base import SimulatorCommand, coefficients_from_options


class Command(SimulatorCommand):
    help = "Splitter angles, coefficients and circuit-simulated amplitudes of a single-photon W state"
    columns = ['mode', 'alpha_re', 'alpha_im', 'alpha_abs', 'theta', 'phi', 'simulated_re', 'simulated_im',
               'round_trip_error']

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--symmetric', type=int, metavar='N', help="Symmetric W state on N modes")
        parser.add_argument('--coeffs', help="Comma-separated amplitudes a1,a2,... (complex literals allowed)")

    def handle(self, *args, **options):
        coefficients = coefficients_from_options(options)
        angles = angles_from_coefficients(coefficients)
        recovered = coefficients_from_angles(angles).as_array()
        alphas = coefficients.as_array()
        round_trip_error = float(np.max(np.abs(recovered - alphas)))
        simulated = generate_w(angles)

        rows = []
        for mode, alpha in enumerate(alphas):
            counts = tuple(1 if k == mode else 0 for k in range(coefficients.N))
            amplitude = simulated.amplitude(counts)
            rows.append({
                'mode': mode + 1,
                'alpha_re': alpha.real,
                'alpha_im': alpha.imag,
                'alpha_abs': abs(alpha),
                'theta': angles.thetas[mode] if mode < len(angles.thetas) else None,
                'phi': angles.phis[mode],
                'simulated_re': amplitude.real,
                'simulated_im': amplitude.imag,
                'round_trip_error': round_trip_error,
            })
        self.emit(rows, options)
