"""End-to-end scenario runs, sweeps, the validation curve, and the CLI."""

import io

import pytest

from conftest import overlapping_pairs
from lorapcsma import cli
from lorapcsma.config import ConfigError, RunConfig, SweepGrid
from lorapcsma.gateway import Outcome
from lorapcsma.metrics import compute_prr, write_csv, write_trace
from lorapcsma.simulation import run_scenario
from lorapcsma.sweep import aloha_validation, result_row, run_sweep


def test_single_device_hourly_schedule():
    cfg = RunConfig(n_devices=1, period_set_s=(100.0,), offsets="zero", seed=1)
    result = run_scenario(cfg)
    assert result.counters.generated == 36
    assert result.counters.received == 36
    assert compute_prr(result.counters) == (1.0, 1.0)


def test_synchronized_hidden_pair_always_collides():
    cfg = RunConfig(n_devices=2, n_areas=2, period_set_s=(100.0,), offsets="zero", p=1.0, seed=3)
    result = run_scenario(cfg)
    assert result.counters.collided == result.counters.generated == 72
    assert compute_prr(result.counters)[0] == 0.0


def test_synchronized_visible_pair_never_collides():
    cfg = RunConfig(n_devices=2, n_areas=1, period_set_s=(100.0,), offsets="zero", p=1.0, seed=3)
    result = run_scenario(cfg)
    assert result.counters.collided == 0
    assert result.counters.received == result.counters.generated


def test_no_mutually_visible_overlap_and_hidden_collisions_only():
    cfg = RunConfig(n_devices=60, n_areas=3, sf_set=(8, 9, 10), p=0.5, seed=21)
    result = run_scenario(cfg)
    vic = result.vicinity
    records = result.records
    for a, b in overlapping_pairs(records):
        i, j = records[a].device, records[b].device
        assert not (vic[i, j] and vic[j, i]), "mutually visible devices overlapped on air"
        if records[a].outcome is Outcome.COLLIDED and records[a].sf == records[b].sf:
            assert not vic[i, j] or not vic[j, i]


CONSERVATION_CONFIGS = [
    RunConfig(n_devices=1, period_set_s=(100.0,), offsets="zero"),
    RunConfig(n_devices=20, n_areas=1, p=0.25, seed=4),
    RunConfig(n_devices=60, n_areas=3, sf_set=(8, 9, 10), p=0.25, seed=5),
    RunConfig(n_devices=2, n_areas=2, period_set_s=(100.0,), offsets="zero", seed=6),
    RunConfig(n_devices=1, period_set_s=(0.05,), offsets="zero", sim_time_s=20.0, seed=7),
    RunConfig(n_devices=9, mac="aloha", period_set_s=(5.0,), offsets="zero", sim_time_s=120.0, seed=8),
    RunConfig(n_devices=10, traffic="poisson", offered_load=1.5, sim_time_s=300.0, seed=9),
    RunConfig(n_devices=10, mac="aloha", traffic="poisson", offered_load=1.5, sim_time_s=300.0, seed=10),
    RunConfig(n_devices=2, period_set_s=(5.0,), duty_cycle_enforce=True, offsets="zero", seed=11),
    RunConfig(n_devices=30, shadowing_sigma_db=6.0, seed=12),
]


@pytest.mark.parametrize("cfg", CONSERVATION_CONFIGS, ids=range(len(CONSERVATION_CONFIGS)))
def test_conservation_identities(cfg):
    result = run_scenario(cfg)
    c = result.counters
    assert c.sent == c.received + c.collided + c.under_sensitivity + c.no_path
    assert c.generated == c.sent + c.suppressed + c.pending_at_end
    assert result.audit.book_count == result.audit.free_count
    assert result.audit.max_paths_bound <= cfg.gateway_paths
    assert result.audit.channel_clear


@pytest.mark.parametrize(
    "cfg",
    [
        RunConfig(n_devices=40, n_areas=2, sf_set=(8, 9, 10), p=0.25, seed=17),
        RunConfig(n_devices=20, mac="aloha", traffic="poisson", offered_load=1.0,
                  sim_time_s=600.0, seed=17),
    ],
    ids=["periodic", "poisson"],
)
def test_replays_are_byte_identical(cfg):
    outputs = []
    for _ in range(2):
        result = run_scenario(cfg)
        csv_out, trace_out = io.StringIO(), io.StringIO()
        write_csv([result_row("cell", 17, cfg, result.counters)], csv_out)
        write_trace(result.records, trace_out)
        outputs.append((csv_out.getvalue(), trace_out.getvalue()))
    assert outputs[0] == outputs[1]


def test_mean_prr_decreases_with_device_count():
    def mean_prr(n):
        values = []
        for seed in range(1, 6):
            result = run_scenario(RunConfig(n_devices=n, n_areas=3, sf_set=(8,)), seed=seed)
            values.append(compute_prr(result.counters)[0])
        return sum(values) / len(values)

    assert mean_prr(20) > mean_prr(80)


def test_offsets_zero_differs_from_uniform():
    base = dict(n_devices=5, period_set_s=(100.0,), seed=2)
    zero = run_scenario(RunConfig(offsets="zero", **base))
    uniform = run_scenario(RunConfig(offsets="uniform", **base))
    # All five fire at t=0 and drain serially, one airtime apart (p=1).
    toa_us = 102_912
    assert [r.air_start_us for r in zero.records[:5]] == [k * toa_us for k in range(5)]
    assert uniform.records[0].air_start_us > 0


def test_sweep_cardinality_and_summaries():
    base = RunConfig(n_devices=2, sim_time_s=50.0, period_set_s=(10.0,), seed=1)
    grid = SweepGrid(
        device_counts=(2, 3, 4),
        p_values=(0.5, 1.0),
        seeds=(1, 2, 3, 4, 5),
    )
    rows = run_sweep(base, grid)
    runs = [r for r in rows if str(r["seed"]).isdigit()]
    means = [r for r in rows if r["seed"] == "mean"]
    stds = [r for r in rows if r["seed"] == "stddev"]
    assert len(runs) == 30 and len(means) == 6 and len(stds) == 6
    assert all(r["prr_generated"] is not None for r in means)
    out = io.StringIO()
    write_csv(rows, out)
    assert len(out.getvalue().splitlines()) == 43  # header + 42 rows


def test_sweep_is_order_independent():
    base = RunConfig(n_devices=2, sim_time_s=50.0, period_set_s=(10.0,), seed=1)
    a = run_sweep(base, SweepGrid(device_counts=(2, 3), seeds=(1, 2)))
    b = run_sweep(base, SweepGrid(device_counts=(3, 2), seeds=(2, 1)))
    outs = []
    for rows in (a, b):
        out = io.StringIO()
        write_csv(rows, out)
        outs.append(out.getvalue())
    assert outs[0] == outs[1]


def test_aloha_validation_low_load_limit():
    from lorapcsma import phy

    toa = phy.time_on_air(8, phy.RadioParams())
    cfg = RunConfig(
        n_devices=50, mac="aloha", traffic="poisson", sf_set=(8,),
        sim_time_s=5000 * toa, seed=1,
    )
    (row,) = aloha_validation([0.02], cfg)
    assert row["throughput"] == pytest.approx(row["theoretical"], abs=0.005)


def test_aloha_validation_requires_aloha_poisson():
    cfg = RunConfig(n_devices=10, mac="pcsma", traffic="poisson", sf_set=(8,))
    with pytest.raises(ConfigError, match="aloha"):
        aloha_validation([0.5], cfg)
    cfg = RunConfig(n_devices=10, mac="aloha", traffic="periodic")
    with pytest.raises(ConfigError, match="poisson"):
        aloha_validation([0.5], cfg)


def test_device_file_run_with_under_sensitivity(tmp_path):
    path = tmp_path / "devices.txt"
    path.write_text(
        "0 100 0 0 8 100 1.0\n"
        "1 6000 0 0 8 100 1.0\n"  # beyond the ~4915 m SF8 gateway range
    )
    cfg = RunConfig(
        n_devices=2, device_file=str(path), period_set_s=(100.0,), offsets="zero", seed=1
    )
    result = run_scenario(cfg)
    assert result.counters.under_sensitivity == 36
    assert result.counters.received == 36


def test_device_file_count_mismatch(tmp_path):
    path = tmp_path / "devices.txt"
    path.write_text("0 0 0 0 8 100 1.0\n")
    cfg = RunConfig(n_devices=2, device_file=str(path))
    with pytest.raises(ValueError, match="defines 1 devices"):
        run_scenario(cfg)


def test_gateway_paths_config_limits_concurrency():
    from conftest import devices_at, hidden_star_positions, make_sim

    # Three mutually hidden devices firing together against two paths.
    devices = devices_at(hidden_star_positions()[:3], period_s=1000.0)
    cfg = RunConfig(
        n_devices=3, period_set_s=(1000.0,), offsets="zero",
        sim_time_s=50.0, gateway_paths=2, seed=1,
    )
    sim = make_sim(devices, cfg, offsets_s=[0.0] * 3)
    result = sim.run()
    assert result.counters.no_path == 1
    assert result.counters.collided == 2
    assert result.audit.max_paths_bound == 2


def test_sensing_interval_override():
    from conftest import devices_at, make_sim

    cfg = RunConfig(n_devices=2, sensing_interval_s=0.255, sim_time_s=50.0, seed=1)
    sim = make_sim(devices_at([(0.0, 0.0), (1.0, 0.0)]), cfg, offsets_s=[0.0, 0.0])
    assert sim.mac.sense_us == [255_000, 255_000]
    result = sim.run()
    # The deferred device re-senses on the fixed cadence, not half airtime.
    assert result.records[1].air_start_us == 255_000


# -- CLI ---------------------------------------------------------------------


def test_cli_run_writes_csv_and_trace(tmp_path, capsys):
    config = tmp_path / "scenario.cfg"
    config.write_text("n_devices = 2\nperiod_set_s = {100}\noffsets = zero\nsim_time_s = 400\n")
    out = tmp_path / "results.csv"
    trace = tmp_path / "trace.tsv"
    code = cli.main(
        ["run", "--config", str(config), "--seed", "5", "--out", str(out), "--trace", str(trace)]
    )
    assert code == 0
    printed = capsys.readouterr().out
    assert "prr_generated=" in printed
    assert out.read_text().startswith("scenario,seed,")
    assert trace.read_text().startswith("device\tsf\t")


def test_cli_mode_override(tmp_path, capsys):
    config = tmp_path / "scenario.cfg"
    config.write_text("n_devices = 2\nperiod_set_s = {100}\noffsets = zero\nsim_time_s = 400\n")
    assert cli.main(["run", "--config", str(config), "--mode", "aloha"]) == 0
    assert "mac=aloha" in capsys.readouterr().out


def test_cli_rejects_bad_config(tmp_path, capsys):
    config = tmp_path / "bad.cfg"
    config.write_text("n_devices = 2\np = 0\n")
    assert cli.main(["run", "--config", str(config)]) == 2
    assert "error:" in capsys.readouterr().err


def test_cli_sweep(tmp_path):
    config = tmp_path / "scenario.cfg"
    config.write_text("n_devices = 2\nsim_time_s = 50\nperiod_set_s = {10}\n")
    grid = tmp_path / "grid.cfg"
    grid.write_text("device_counts = {2,3}\nseeds = {1,2}\n")
    out = tmp_path / "sweep.csv"
    assert cli.main(["sweep", "--config", str(config), "--grid", str(grid), "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 1 + 4 + 4  # header, 4 runs, mean+stddev per cell


def test_cli_validate_aloha(tmp_path, capsys):
    out = tmp_path / "aloha.csv"
    code = cli.main(
        ["validate-aloha", "--g", "0.1", "--packet-times", "2000", "--devices", "20", "--out", str(out)]
    )
    assert code == 0
    text = out.read_text()
    assert text.splitlines()[0] == "g,throughput,theoretical"
    assert "0.100000" in text
