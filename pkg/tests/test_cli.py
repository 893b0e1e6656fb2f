import numpy as np
import pytest

from ceramopt import io
from ceramopt.cli import main
from ceramopt.config import ConfigError, parse_config
from ceramopt.fem import Material, element_stresses, solve_state, LoadCase
from ceramopt.mesh import generate_rod, default_bend


SMALL_FLOW = """
[geometry]
nx = 21
ny = 5
bend_amplitude = 0.03

[flow]
max_iters = 12
snapshot_every = 4
"""


def run(tmp_path, *args, config=None):
    argv = list(args) + ["--out", str(tmp_path / "out")]
    if config is not None:
        cfg = tmp_path / "run.ini"
        cfg.write_text(config)
        argv += ["--config", str(cfg)]
    return main(argv), tmp_path / "out"


class TestIO:
    def test_mesh_roundtrip(self, bent_rod, tmp_path):
        io.write_mesh(tmp_path / "m.txt", bent_rod)
        back = io.read_mesh(tmp_path / "m.txt")
        assert np.array_equal(back.nodes, bent_rod.nodes)
        assert np.array_equal(back.triangles, bent_rod.triangles)
        assert np.array_equal(back.tags, bent_rod.tags)
        assert (back.nx, back.ny) == (bent_rod.nx, bent_rod.ny)

    def test_field_and_stress_roundtrip(self, bent_rod, material, tmp_path):
        U = solve_state(bent_rod, material, LoadCase.unit_force(bent_rod)).U
        io.write_field(tmp_path / "f.txt", U)
        assert np.array_equal(io.read_field(tmp_path / "f.txt").ravel(), U)
        sigma = element_stresses(bent_rod, U, material)
        io.write_stress(tmp_path / "s.txt", sigma)
        rows = io.read_stress(tmp_path / "s.txt")
        assert np.array_equal(rows, np.stack([sigma[:, 0, 0], sigma[:, 1, 1], sigma[:, 0, 1]], 1))

    def test_bad_magic(self, tmp_path):
        (tmp_path / "x.txt").write_text("field2d v1 3\n0 0\n")
        with pytest.raises(ValueError):
            io.read_mesh(tmp_path / "x.txt")


class TestConfig:
    def test_defaults(self):
        cfg = parse_config("")
        assert cfg.geometry.kind == "rod"
        assert cfg.weibull.m == 10
        assert cfg.flow.step_alpha is None

    def test_unknown_key(self):
        with pytest.raises(ConfigError) as err:
            parse_config("[flow]\nmax_iter = 3\n")
        assert err.value.key == "flow.max_iter"

    def test_unknown_section(self):
        with pytest.raises(ConfigError):
            parse_config("[solver]\ntol = 1\n")

    def test_bad_value(self):
        with pytest.raises(ConfigError) as err:
            parse_config("[weibull]\nm = ten\n")
        assert "weibull.m" in err.value.key


class TestCommands:
    def test_mesh(self, tmp_path):
        code, out = run(tmp_path, "mesh")
        assert code == 0
        assert (out / "mesh.txt").read_text().splitlines()[0] == "mesh2d v1 549 960 61 9"
        assert (out / "mesh.png").stat().st_size > 0
        assert "mesh.txt" in io.read_manifest(out / "manifest.txt")

    def test_solve_objective(self, tmp_path):
        assert run(tmp_path, "solve")[0] == 0
        code, out = run(tmp_path, "objective")
        assert code == 0
        lines = dict(l.split() for l in (out / "objective.txt").read_text().splitlines())
        mesh = generate_rod(deform=default_bend())
        U = io.read_field(out / "field.txt")
        assert float(lines["J"]) > 0
        assert float(lines["eta"]) == pytest.approx(float(lines["J"]) ** -0.1, rel=1e-12)
        surv = io.read_csv(out / "survival.csv")
        assert len(surv["F"]) == 20
        assert np.all(np.diff(surv["p_survival"]) < 0)
        assert U.shape == (mesh.n_nodes, 2)
        manifest = io.read_manifest(out / "manifest.txt")
        assert {"field.txt", "survival.csv", "intensity.png"} <= set(manifest)

    def test_gradcheck(self, tmp_path):
        code, out = run(tmp_path, "gradcheck")
        assert code == 0
        tab = io.read_csv(out / "gradcheck.csv")
        assert list(tab["epsilon"]) == [1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8]
        assert abs(tab["ratio"][-1] - 1) < 1e-4

    def test_flow(self, tmp_path):
        code, out = run(tmp_path, "flow", config=SMALL_FLOW)
        assert code == 0
        tr = io.read_csv(out / "trace.csv")
        assert np.all(np.diff(tr["J"]) < 0)
        assert np.max(np.abs(tr["volume"] / tr["volume"][0] - 1)) < 1e-12
        names = sorted(p.name for p in (out / "snapshots").iterdir())
        assert names[0] == "mesh_00000.txt" and "survival_00012.csv" in names

    def test_mesh_file_roundtrip(self, tmp_path):
        assert run(tmp_path, "mesh")[0] == 0
        first = (tmp_path / "out" / "mesh.txt").read_bytes()
        (tmp_path / "saved.txt").write_bytes(first)
        sub = tmp_path / "b"
        sub.mkdir()
        code, out = run(sub, "mesh", config=f"[geometry]\nmesh_file = {tmp_path / 'saved.txt'}\n")
        assert code == 0
        assert (out / "mesh.txt").read_bytes() == first

    def test_reproducible_manifest(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        a.mkdir()
        b.mkdir()
        for d in (a, b):
            assert run(d, "objective", "--seed", "3")[0] == 0
        ma = (a / "out" / "manifest.txt").read_text()
        mb = (b / "out" / "manifest.txt").read_text()
        assert ma == mb

    def test_unknown_key_exit_code(self, tmp_path, capsys):
        code, _ = run(tmp_path, "mesh", config="[geometry]\nwidth = 3\n")
        assert code == 2
        err = capsys.readouterr().err.strip()
        assert err.startswith("error=config key=geometry.width ")
        assert len(err.splitlines()) == 1

    def test_numerical_error_exit_code(self, tmp_path, capsys):
        code, _ = run(tmp_path, "flow", config=SMALL_FLOW + "step_alpha = 1e9\n")
        assert code == 1
        assert capsys.readouterr().err.startswith("error=numerical")
