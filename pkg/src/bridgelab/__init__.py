"""Bridges between encryption schemes, their completeness and composition,
Gentry-type bridges and fully composable homomorphic encryption, at toy
parameter sizes. Nothing here is secure."""
from .bridges import (Bridge, KeyBundle, check_bridge_correct, check_complete, compose,
                      concat_bridges, double_additive_bridge, gm_identity_bridge,
                      halfkey_bridges, identity_bridge, lwe_additive_bridge, modswitch_bridge,
                      revealing_bridges)
from .circuits import BooleanCircuit, CircuitBuilder, arithmetize, eval_boolean, evaluate_ring
from .concrete import GmParams, LweCiphertext, LweParams, make_gm_scheme, make_lwe_scheme
from .core import (Ciphertext, FiniteSet, KeyPair, SchemeDescriptor, augment, check_correctness,
                   fiber_power, graph_scheme)
from .errors import BridgeLabError
from .gentry import (BootstrapScheme, FcheScheme, GentryBridgeSpec, check_fche, circuit_bridge,
                     fche_transform, gentry_bridge, zero_substituted_bridge_key)
from .harness import GameReport, run_bridge_indcpa, run_distinguisher, run_indcpa
from .homomorphic import GswParams, HomSchemeDescriptor, make_gsw, noise_budget_check, trivial_fhe

__version__ = "0.1.0"
