import numpy as np
import pytest

from qlinsys.errors import ProblemFileError
from qlinsys.noise import NoiseModel
from qlinsys.problem import (ProblemFile, RunReport, VariableResult,
                             load_problem, parse_problem)

MINIMAL = """
matrix:
  - [-1.8, 0.6]
  - [-0.4, 1.4]
rhs: [-0.6, 0.8]
"""


class TestParseProblem:
    def test_minimal(self):
        prob = parse_problem(MINIMAL)
        np.testing.assert_allclose(prob.matrix, [[-1.8, 0.6], [-0.4, 1.4]])
        np.testing.assert_allclose(prob.rhs, [-0.6, 0.8])
        assert prob.protocol == "circuit"
        assert prob.target is None
        assert prob.matrix.dtype == np.float64

    def test_full_document(self):
        text = MINIMAL + """
protocol: chain
target: 2
shots: 512
series: 3
seed: 9
noise: {intercept: 0.1, slope: -0.2, jitter: 0.01}
chain:
  couplings: [1.0]
  frequencies: [0.5, -0.5]
  time: 3.0
  site: 2
"""
        prob = parse_problem(text)
        assert prob.protocol == "chain"
        assert prob.target == 2
        assert prob.shots == 512 and prob.series == 3 and prob.seed == 9
        assert prob.noise == NoiseModel(0.1, -0.2, 0.01)
        assert prob.chain.time == 3.0
        assert prob.chain_site == 2

    def test_yaml_error_carries_location(self):
        with pytest.raises(ProblemFileError, match=r"problem.yaml:\d+:\d+"):
            parse_problem("matrix: [[1, 2\nrhs: [1]", source="problem.yaml")

    def test_unknown_top_level_key(self):
        with pytest.raises(ProblemFileError, match="unknown keys"):
            parse_problem(MINIMAL + "\nmatrx: 3\n")

    def test_non_square_matrix(self):
        with pytest.raises(ProblemFileError, match="square"):
            parse_problem("matrix: [[1, 2, 3], [4, 5, 6]]\nrhs: [1, 2]")

    def test_rhs_length_mismatch(self):
        with pytest.raises(ProblemFileError, match="rhs length"):
            parse_problem("matrix: [[1, 0], [0, 1]]\nrhs: [1, 2, 3]")

    def test_bad_protocol(self):
        with pytest.raises(ProblemFileError, match="protocol"):
            parse_problem(MINIMAL + "protocol: teleport\n")

    def test_target_out_of_range(self):
        with pytest.raises(ProblemFileError, match="out of range"):
            parse_problem(MINIMAL + "target: 3\n")

    def test_non_numeric_entries(self):
        with pytest.raises(ProblemFileError, match="non-numeric"):
            parse_problem("matrix: [[a, b], [c, d]]\nrhs: [1, 2]")

    def test_chain_missing_field(self):
        with pytest.raises(ProblemFileError, match="missing 'time'"):
            parse_problem(MINIMAL + "chain: {couplings: [1.0], "
                                    "frequencies: [0.1, 0.2]}\n")

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(ProblemFileError, match="cannot read"):
            load_problem(tmp_path / "nope.yaml")

    def test_load_round_trip(self, tmp_path):
        path = tmp_path / "prob.yaml"
        path.write_text(MINIMAL)
        prob = load_problem(path)
        assert isinstance(prob, ProblemFile)
        np.testing.assert_allclose(prob.rhs, [-0.6, 0.8])


class TestRunReport:
    def _report(self):
        from qlinsys.linalg import LinearSystem, feasibility
        feas = feasibility(LinearSystem([[-1.8, 0.6], [-0.4, 1.4]],
                                        [-0.6, 0.8]))
        results = (
            VariableResult(k=1, x_classical=0.578947, x_quantum_exact=0.578947,
                           x_sq_sampled=0.34, x_corrected=0.332),
            VariableResult(k=2, x_classical=0.736842, x_quantum_exact=None),
        )
        return RunReport(protocol="circuit", results=results,
                         feasibility=feas, elapsed_s=0.5)

    def test_csv_layout_and_determinism(self, tmp_path):
        report = self._report()
        report.write_csv(tmp_path / "a.csv")
        report.write_csv(tmp_path / "b.csv")
        a = (tmp_path / "a.csv").read_bytes()
        assert a == (tmp_path / "b.csv").read_bytes()
        lines = a.decode().splitlines()
        assert lines[0] == "k,x_classical,x_quantum_exact,x_sq_sampled,x_corrected"
        assert lines[1].startswith("1,0.578947,")
        assert lines[2] == "2,0.736842,,,"

    def test_summary_mentions_rescale_only_when_scaled(self):
        report = self._report()
        assert not any("RESCALED" in ln for ln in report.summary_lines())
        from dataclasses import replace
        scaled = replace(report, matrix_scale=2.0)
        assert any("RESCALED" in ln for ln in scaled.summary_lines())

    def test_mismatch_tracking(self):
        report = self._report()
        assert report.max_exact_mismatch <= 1e-6
