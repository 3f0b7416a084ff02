"""shocklab: a simulation laboratory for geometric shock formation in a
coupled fast/slow quasilinear wave system in 1+2 dimensions.

The fast wave steepens and forms a shock in finite time: the inverse
foliation density mu vanishes linearly, the transversal derivative of the
fast wave blows up like 1/mu, and the slow wave stays bounded up to the
singularity.  The package provides a plane-symmetric characteristic
solver, a 2D solver in geometric (eikonal-adapted) coordinates, a
Cartesian reference solver, and the diagnostic/energy machinery to verify
the predicted behavior quantitatively.
"""

from .metric import (MetricModel, MetricEval, eval_fast_metric,
                     eval_slow_metric, null_form, semilinear_sources,
                     make_model, validate_model)
from .frame import (FrameBundle, FrameComponents, ConnectionPieces,
                    build_frame, frame_residuals, frame_G_components,
                    connection_pieces, cartesian_in_frame, jacobian_check,
                    initial_eikonal)
from .profiles import PlaneDataSpec, Geo2DDataSpec
from .plane import (PlaneState, init_plane, deltastar, step_plane, run_plane,
                    simple_wave_mu, simple_wave_shock_time,
                    deltastar_closed_form)
from .geo2d import Geo2DState, init_geo2d, spatial_derivatives, step_geo2d, \
    run_geo2d, Geo2DRun
from .cartesian import (CartesianState, init_cartesian, step_cartesian,
                        run_cartesian, compare_to_geo)
from . import diagnostics, errors

__version__ = "0.1.0"
