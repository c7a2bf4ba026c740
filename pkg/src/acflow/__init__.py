"""acflow: a laboratory for the singularly perturbed Allen-Cahn flow.

Simulates du/dt = Lap(u) - W'(u)/eps^2, extracts the geometry of its
phase-transition level sets, and measures convergence to curve shortening
flow, Gaussian-density entropy, discrepancy/monotonicity behaviour, and
curvature bounds against exact references.
"""

from .fields import (CLAMPED, PERIODIC, GridSpec, ScalarField, fd_gradient,
                     fd_hessian, fd_laplacian, potential_eval, read_field,
                     write_field)
from .profile import (ALPHA, CutoffProfile, HeteroclinicProfile, cutoff_profile,
                      cutoff_residual, cutoff_residual_bound, heteroclinic,
                      profile_energy_alpha)
from .solver import (SolverConfig, StabilityError, Trajectory, default_config,
                     discrete_energy, init_from_curve, simulate, step)
from .geometry import (CurveGeometry, GraphOverReference, Polyline,
                       circle_polyline, enhanced_second_fundamental_form,
                       extract_nodal_set, graph_over, hausdorff_distance,
                       nearest_component, normal_velocity,
                       parabolic_holder_seminorm, polyline_curvature,
                       signed_distance)
from .diagnostics import (DensityField, EntropyResult, EntropySearch,
                          LeakageWarning, discrepancy, energy_measure, entropy,
                          gaussian_density, gaussian_density_trace)
from .approximation import (FermiFrame, ResidualReport, ShiftField,
                            build_shifted_profile, fermi_coordinates,
                            frame_from_nodal_set, normal_z_grid,
                            residual_report, sample_normal_lines,
                            solve_optimal_shift)
from .csf import (CsfState, circle_exact, csf_entropy, curve_gaussian_density,
                  front_tracking, front_tracking_step, grim_reaper,
                  grim_reaper_curve)
from .harness import (ConvergenceTable, DiagnosticsReport, ScenarioConfig,
                      convergence_sweep, curvature_sweep, default_scenario,
                      fit_power_law, gap_probe, grim_reaper_exhibit,
                      initial_field, run_scenario, stripe_field, thresholds)

__version__ = "0.1.0"
