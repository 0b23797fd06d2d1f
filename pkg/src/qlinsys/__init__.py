"""Solving small real linear systems via unitary transformations.

The inverse of a feasible system matrix is encoded into orthogonal
matrices, realized either as CNOT-plus-rotation circuits on M+1 qubits or
as the natural evolution of an XX spin chain, with shot sampling and an
affine bias-correction pipeline emulating hardware runs.
"""

from .embedding import (FullEmbedding, ReducedEmbedding, apply_embedding,
                        embed_full, embed_reduced)
from .errors import (DegenerateFit, GramSchmidtDegenerate, InfeasibleEmbedding,
                     NoConvergence, NormTooLarge, ProblemFileError,
                     QlinsysError, SingularMatrix)
from .linalg import (FeasibilityReport, LinearSystem, classical_solve,
                     determinant, feasibility, inverse, minor,
                     random_encodable_rhs, random_feasible_matrix)
from .noise import (CorrectionModel, ErrorReport, NoiseModel, apply_correction,
                    calibrate, error_report, fit_correction,
                    measure_with_noise)
from .problem import ProblemFile, RunReport, VariableResult, load_problem
from .simulator import (CNot, Gate, GateCircuit, Ry, Rz, ShotRecord,
                        StateVector, apply_gate, circuit_matrix, composite_uij,
                        excitation_state, ground_state, one_excitation_block,
                        prob_one, projection, sample_shots, simulate)
from .spinchain import (ChainFitOptions, ChainFitResult, ChainSpec,
                        ProjectionCoefficients, evolution_block, evolve,
                        fit_chain, one_excitation_hamiltonian,
                        projection_coefficients)
from .synthesis import (EncodingSolution, ExtractionSolution,
                        build_full_protocol, coefficient_probe,
                        encoded_amplitudes, encoding_circuit,
                        extraction_circuit, readout_site, solve_encoding,
                        solve_extraction)

__version__ = "0.1.0"
