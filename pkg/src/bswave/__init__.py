"""1-D guided-wave simulation with BSWI finite elements and precise time integration."""

from .basis import BasisSpec, BasisTable, build_basis, build_table, eval_dphi, eval_phi, shape_functions
from .crack import CrackSpec, f_I, f_II, make_crack, spring_coupling
from .elements import ALUMINUM, STEEL, GlobalSystem, Material, Mesh1D, Section, assemble, beam_element, make_mesh, rod_element
from .pim import HarmonicSegment, Propagator, StateSystem, build_state, duhamel_coeffs, newmark, precise_expm, simulate, step_harmonic
from .record import Snapshot, WaveRecord
from .signal import ToneBurst, decompose, detect_arrivals, group_velocity, locate_crack, toneburst_eval

__version__ = "0.1.0"
