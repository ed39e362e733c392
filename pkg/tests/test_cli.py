import io
import json

import pytest

from chiplet_fabric import channel as ch
from chiplet_fabric import cli
from chiplet_fabric import topology as topo


def _run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture(autouse=True)
def _clear_seed(monkeypatch):
    monkeypatch.delenv(cli.SEED_ENV, raising=False)


class TestConfig:
    def test_flags_override_file(self, tmp_path):
        path = tmp_path / "run.ini"
        path.write_text("[model]\nf_link = 0.8\nn_max = 300\n[run]\nseed = 4\n")
        cfg = cli.load_config(str(path), "fid-sweep", {"f_link": 0.95})
        assert (cfg.f_link, cfg.n_max, cfg.seed) == (0.95, 300, 4)

    def test_duplicate_key_across_sections(self, tmp_path):
        path = tmp_path / "run.ini"
        path.write_text("[a]\nseed = 1\n[b]\nseed = 2\n")
        with pytest.raises(cli.ConfigError, match="seed"):
            cli.read_config_file(str(path))

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "run.ini"
        path.write_text("[a]\ncolour = blue\n")
        with pytest.raises(cli.ConfigError, match="colour"):
            cli.read_config_file(str(path))

    def test_seed_precedence(self, monkeypatch):
        assert cli.resolve_config("yield").seed == 0
        monkeypatch.setenv(cli.SEED_ENV, "17")
        assert cli.resolve_config("yield").seed == 17
        assert cli.resolve_config("yield", {"seed": 3}).seed == 3
        assert cli.resolve_config("yield", {"seed": 3}, {"seed": 9}).seed == 9

    def test_bad_env_seed(self, monkeypatch):
        monkeypatch.setenv(cli.SEED_ENV, "abc")
        with pytest.raises(cli.ConfigError, match=cli.SEED_ENV):
            cli.resolve_config("yield")

    def test_unknown_cx_preset_lists_valid(self):
        with pytest.raises(cli.ConfigError) as info:
            cli.resolve_config("fid-sweep", flag_values={"cx_preset": "nope"})
        assert all(name in str(info.value) for name in cli.CX_PRESETS)

    def test_cx_preset_sets_fidelity(self):
        name, value = next(iter(cli.CX_PRESETS.items()))
        assert cli.resolve_config("fid-sweep", {"cx_preset": name}).f_cx_chip == value

    def test_unknown_d4_preset(self):
        with pytest.raises(cli.ConfigError, match="montreal"):
            cli.resolve_config("chain-compare", {"d4_preset": "paris"})

    def test_missing_explicit_d4_key_named(self):
        with pytest.raises(cli.ConfigError, match="'theta'"):
            cli.resolve_config("chain-compare", {"epsilon": 0.01, "eta": 0.01, "delta": 0.01})

    def test_explicit_d4(self):
        cfg = cli.resolve_config("chain-compare",
                                 {"epsilon": 0.01, "eta": 0.02, "delta": 0.03, "theta": 0.1})
        assert cfg.d4 == ch.D4Params(0.01, 0.02, 0.03, 0.1) and cfg.d4_preset == "custom"

    def test_negative_rate_rejected(self):
        with pytest.raises(cli.ConfigError):
            cli.resolve_config("chain-compare",
                               {"epsilon": -0.01, "eta": 0.02, "delta": 0.03, "theta": 0.1})

    def test_topo_needs_layout(self):
        with pytest.raises(cli.ConfigError, match="layout"):
            cli.resolve_config("topo-metrics")


class TestExitCodes:
    def test_usage_error(self):
        assert _run("no-such-command")[0] == 2
        assert _run("topo-metrics")[0] == 2

    def test_model_error(self):
        code, _, err = _run("yield", "--p", "1.0")
        assert code == 1 and "model error" in err

    def test_success(self):
        code, out, err = _run("yield", "--qubits", "50", "--p", "0.01")
        assert code == 0 and "0.6050" in out + err


class TestOutputs:
    def test_same_seed_same_bytes(self, tmp_path):
        path = tmp_path / "a.csv"
        args = ["frag-sim", "--n-circuits", "2", "--depth", "3", "--seed", "5",
                "--output", str(path)]
        assert _run(*args)[0] == 0
        first = path.read_bytes()
        assert _run(*args)[0] == 0
        assert path.read_bytes() == first
        assert first.startswith(b"# subcommand=")

    def test_csv_on_stdout(self):
        code, out, _ = _run("ecc-table", "--max-n", "3")
        assert code == 0
        rows = [line for line in out.splitlines() if not line.startswith("#")]
        assert rows[0] == "Qubits Sent,Qubits Used,Error Multiplier,Efficiency"
        assert len(rows) == 4

    def test_topology_dump(self, tmp_path):
        path = tmp_path / "t.json"
        code, out, _ = _run("topo-metrics", "--layout", "falcon", "--chips", "2x2",
                            "--dump-topology", str(path))
        assert code == 0
        t = topo.Topology.from_dict(json.loads(path.read_text()))
        assert t == topo.build_falcon_chiplets(2, 2)

    def test_choi_dump(self, tmp_path):
        path = tmp_path / "c.json"
        code, _, _ = _run("chain-compare", "--m-max", "3", "--k-max", "2",
                          "--dump-choi", str(path))
        assert code == 0
        data = json.loads(path.read_text())
        assert data["dim"] == 4
        keys = [(e["row"], e["col"]) for e in data["entries"]]
        assert keys == sorted(keys)
        ch.check_choi(ch.choi_from_dict(data))

    def test_fid_sweep_columns(self):
        code, out, _ = _run("fid-sweep", "--family", "falcon", "--n-max", "300",
                            "--delta", "0.0002")
        assert code == 0
        header = [line for line in out.splitlines() if not line.startswith("#")][0]
        assert "f_mono_Δ=0.0002" in header

    def test_required_link_columns(self):
        code, out, _ = _run("required-link", "--family", "falcon", "--n-max", "300",
                            "--delta", "0.0002")
        assert code == 0
        header = [line for line in out.splitlines() if not line.startswith("#")][0]
        assert "f_link_required_Δ=0.0002" in header
