import pytest

from rrcma.cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, build_config, main, make_parser


class TestCli:
    def test_list_problems(self, capsys):
        assert main(["list-problems"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "himmelblau" in out and "gallagher21" in out

    def test_run_rrf_ecdf(self, tmp_path, capsys):
        out = str(tmp_path)
        code = main(["run", "--problem", "himmelblau", "--runs", "2", "--budget", "3e3",
                     "--repelling", "on", "--coverage-c", "2", "--out", out])
        assert code == EXIT_OK
        assert main(["rrf", out]) == EXIT_OK
        assert (tmp_path / "rrf_runs.csv").read_text().startswith(
            "run_id,function,dimension,instance,strategy,rrf,n_restarts,n_redundant")
        assert main(["ecdf", out]) == EXIT_OK
        assert (tmp_path / "ecdf.csv").exists()
        assert "restart-rr-c2" in capsys.readouterr().out

    def test_config_file_overridden_by_flags(self, tmp_path):
        cfg_file = tmp_path / "exp.cfg"
        cfg_file.write_text("problem = rastrigin\nruns = 7\nbudget = 500\nrepelling = on\n")
        args = make_parser().parse_args(["run", "--config", str(cfg_file), "--runs", "3"])
        cfg = build_config(args)
        assert cfg.problems == ["rastrigin"] and cfg.runs == 3 and cfg.budget == 500
        assert cfg.repelling is True

    def test_config_error_exit(self, capsys):
        assert main(["run", "--problem", "nope", "--runs", "1"]) == EXIT_CONFIG
        assert "problem" in capsys.readouterr().err
        assert main(["run", "--budget", "12.5"]) == EXIT_CONFIG
        assert main(["run", "--gamma", "abc", "--repelling", "on"]) == EXIT_CONFIG

    def test_unknown_config_key(self, tmp_path):
        cfg_file = tmp_path / "exp.cfg"
        cfg_file.write_text("colour = blue\n")
        assert main(["run", "--config", str(cfg_file)]) == EXIT_CONFIG

    def test_runtime_error_exit(self, tmp_path):
        assert main(["rrf", str(tmp_path / "missing")]) == EXIT_RUNTIME

    def test_optima_export(self, capsys):
        assert main(["optima", "himmelblau"]) == EXIT_OK
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "kind,f,x1,x2" and len(lines) == 5

    def test_argparse_rejects_bad_strategy(self):
        with pytest.raises(SystemExit) as err:
            main(["run", "--strategy", "cmsa"])
        assert err.value.code == 2
