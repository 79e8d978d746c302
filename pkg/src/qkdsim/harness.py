"""Scenario runner and the ``qkd-sim`` command line.

Exit codes: 0 success, 2 configuration error, 3 invariant violation,
4 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from .adversaries import (
    FakedStateBB84,
    FakedStateForcing,
    InterceptResend,
    Party,
    Siphon,
    mitm_three_stage,
)
from .analysis import RunReport, summarize
from .detector import NO_CLICK, DetectorBank
from .protocols import (
    AGREED_BASIS,
    ALICE,
    BOB,
    EVE,
    EveNote,
    InterceptHooks,
    ThreeStageRecord,
    Transcript,
    run_bb84,
    run_three_stage,
)
from .quantum import RandomStream, draw_bit

log = logging.getLogger(__name__)

PROTOCOLS = ("bb84", "three-stage")
ATTACKS = ("none", "intercept-resend", "faked-state", "siphon", "mitm")
THREE_STAGE_ONLY = ("siphon", "mitm")
SEED_ENV = "QKD_SIM_SEED"

EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT, EXIT_IO = 0, 2, 3, 4


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class InvariantViolation(RuntimeError):
    pass


@dataclass
class ScenarioConfig:
    protocol: str = "bb84"
    attack: str = "none"
    pulses: int = 1000
    seed: int = 0
    grid_size: int = 1024
    dead_slots: int = 1
    authenticated: bool = False
    siphon_photons_per_round: int = 0
    photons_per_pulse: int = 1
    repeat: int = 1
    trace_path: str | None = None
    report_path: str | None = None

    def validate(self) -> ScenarioConfig:
        if self.protocol not in PROTOCOLS:
            raise ConfigError("protocol", f"must be one of {', '.join(PROTOCOLS)}")
        if self.attack not in ATTACKS:
            raise ConfigError("attack", f"must be one of {', '.join(ATTACKS)}")
        if self.attack in THREE_STAGE_ONLY and self.protocol != "three-stage":
            raise ConfigError("attack", f"{self.attack} requires protocol three-stage")
        checks = [("pulses", 1), ("grid_size", 2), ("dead_slots", 0),
                  ("siphon_photons_per_round", 0), ("photons_per_pulse", 1), ("repeat", 1)]
        for name, lo in checks:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(name, f"must be an integer, got {value!r}")
            if value < lo:
                raise ConfigError(name, f"must be >= {lo}, got {value}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError("seed", "must be a 64-bit unsigned integer")
        if not isinstance(self.authenticated, bool):
            raise ConfigError("authenticated", "must be a boolean")
        return self

    def echo(self) -> dict:
        return dataclasses.asdict(self)


FIELDS = {f.name for f in dataclasses.fields(ScenarioConfig)}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qkd-sim", description="Seeded QKD attack simulator.")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one scenario")
    run.add_argument("--protocol", choices=PROTOCOLS)
    run.add_argument("--attack", choices=ATTACKS)
    run.add_argument("--pulses", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--grid-size", dest="grid_size", type=int)
    run.add_argument("--dead-slots", dest="dead_slots", type=int)
    run.add_argument("--authenticated", action="store_const", const=True)
    run.add_argument("--siphon-photons", dest="siphon_photons_per_round", type=int)
    run.add_argument("--photons-per-pulse", dest="photons_per_pulse", type=int)
    run.add_argument("--repeat", type=int)
    run.add_argument("--trace", dest="trace_path")
    run.add_argument("--report", dest="report_path")
    run.add_argument("--config", dest="config_file")
    run.add_argument("-v", "--verbose", action="store_true")
    return p


def load_config_file(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be an object")
    unknown = sorted(set(data) - FIELDS)
    if unknown:
        raise ConfigError(unknown[0], "unknown configuration key")
    return data


def parse_config(argv, config_file: str | None = None) -> ScenarioConfig:
    """Build a config from defaults, then the file, then explicit flags.

    ``argv`` excludes the program name and starts with the subcommand.
    """
    args = _parser().parse_args(list(argv))
    values: dict = {}
    env_seed = os.environ.get(SEED_ENV)
    if env_seed is not None:
        try:
            values["seed"] = int(env_seed)
        except ValueError:
            raise ConfigError("seed", f"{SEED_ENV}={env_seed!r} is not an integer") from None
    path = args.config_file or config_file
    if path:
        values.update(load_config_file(path))
    for name in FIELDS:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    cfg = ScenarioConfig(**values)
    return cfg.validate()


# ------------------------------------------------------------- execution

def _mitm_transcript(cfg: ScenarioConfig, seed: int) -> Transcript:
    alice_rng = RandomStream(seed, ALICE)
    bits = [draw_bit(alice_rng) for _ in range(cfg.pulses)]
    result = mitm_three_stage(
        bits,
        Party("alice", alice_rng),
        Party("bob", RandomStream(seed, BOB), DetectorBank(cfg.dead_slots)),
        Party("eve", RandomStream(seed, EVE), DetectorBank(cfg.dead_slots)),
        authenticated=cfg.authenticated,
        grid_size=cfg.grid_size,
    )
    out = Transcript("three-stage", "mitm", seed, handshake_refused=result.detected)
    if result.detected:
        return out
    bob_leg = {r.index: r for r in result.bob_leg}
    for rec in result.alice_leg:
        i = rec.index
        leg = bob_leg.get(i)
        if leg is None:
            leg = ThreeStageRecord(i, rec.alice_bit, rec.u_a, rec.u_b, rec.stage_states, None, NO_CLICK)
        else:
            leg = dataclasses.replace(leg, alice_bit=rec.alice_bit)
        out.records.append(leg)
        if rec.bob_detection.clicked:
            out.eve_notes[i] = EveNote(i, rec.bob_detection.bit, AGREED_BASIS, action="relay")
    return out


def _hooks(cfg: ScenarioConfig, eve: RandomStream) -> InterceptHooks:
    if cfg.attack == "none":
        return InterceptHooks()
    if cfg.attack == "intercept-resend":
        basis = None if cfg.protocol == "bb84" else AGREED_BASIS
        return InterceptResend(eve, basis).hooks()
    if cfg.attack == "faked-state":
        if cfg.protocol == "bb84":
            return FakedStateBB84(eve).hooks()
        return FakedStateForcing(eve, AGREED_BASIS).hooks()
    if cfg.attack == "siphon":
        return Siphon(eve, cfg.siphon_photons_per_round, cfg.grid_size).hooks()
    raise ConfigError("attack", f"no hook wiring for {cfg.attack}")


def run_trial(cfg: ScenarioConfig, seed: int) -> Transcript:
    if cfg.attack == "mitm":
        tr = _mitm_transcript(cfg, seed)
    else:
        taps = _hooks(cfg, RandomStream(seed, EVE))
        if cfg.protocol == "bb84":
            tr = run_bb84(cfg.pulses, seed, taps, cfg.dead_slots)
        else:
            tr = run_three_stage(cfg.pulses, seed, taps, cfg.grid_size, cfg.dead_slots,
                                 photons=cfg.photons_per_pulse)
        tr.attack = cfg.attack
    tr.config = dict(cfg.echo(), seed=seed)
    return tr


def check_invariants(cfg: ScenarioConfig, transcript: Transcript, report: RunReport) -> None:
    problems = []
    expected = 0 if transcript.handshake_refused else cfg.pulses
    if len(transcript.records) != expected:
        problems.append(f"{len(transcript.records)} records for {expected} pulses")
    if report.detections > report.pulses_sent:
        problems.append("more detections than pulses")
    for name in ("sift_fraction", "detection_rate", "qber", "eve_knowledge_fraction"):
        if not 0.0 <= getattr(report, name) <= 1.0:
            problems.append(f"{name} outside [0, 1]")
    key = (cfg.protocol, cfg.attack)
    if key in {("bb84", "none"), ("bb84", "faked-state"), ("three-stage", "none"),
               ("three-stage", "mitm")} and report.qber != 0.0:
        problems.append(f"qber {report.qber} should be exactly 0")
    if key in {("bb84", "faked-state"), ("three-stage", "mitm")} and report.sifted \
            and report.eve_knowledge_fraction != 1.0:
        problems.append("eavesdropper should know every sifted bit")
    if cfg.attack == "mitm" and cfg.authenticated != transcript.handshake_refused:
        problems.append("authentication toggle did not decide the handshake")
    if problems:
        raise InvariantViolation("; ".join(problems))


def run_scenario(config: ScenarioConfig, trial: int = 0) -> tuple[Transcript, RunReport]:
    """Run one trial (seed ``config.seed + trial``) and write its outputs."""
    seed = (config.seed + trial) % 2**64
    transcript = run_trial(config, seed)
    report = summarize(transcript)
    check_invariants(config, transcript, report)
    if config.trace_path:
        write_trace(transcript, _trial_path(config.trace_path, trial, config.repeat))
    if config.report_path:
        write_report(report, _trial_path(config.report_path, trial, config.repeat))
    return transcript, report


def _trial_path(path: str, trial: int, repeat: int) -> Path:
    p = Path(path)
    if repeat <= 1:
        return p
    return p.with_name(f"{p.stem}.{trial}{p.suffix}")


# ------------------------------------------------------------ serialization

def trace_rows(transcript: Transcript):
    """One dict per pulse (BB84) or round (three-stage), in index order."""
    for r in transcript.records:
        note = transcript.eve_notes.get(r.index)
        if transcript.protocol == "bb84":
            a_basis, b_basis, sifted = r.alice_basis, r.bob_basis, r.sifted
        else:
            a_basis = b_basis = r.agreed_basis
            sifted = r.bob_detection.clicked
        yield {
            "index": r.index,
            "protocol": transcript.protocol,
            "alice_bit": r.alice_bit,
            "alice_basis": str(a_basis),
            "eve_action": note.action if note is not None and note.action else "none",
            "bob_basis": str(b_basis),
            "detection": str(r.bob_detection),
            "sifted": bool(sifted),
        }


def write_trace(transcript: Transcript, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in trace_rows(transcript):
            fh.write(json.dumps(row, separators=(",", ":")) + "\n")


def report_json(report: RunReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"


def write_report(report: RunReport, path) -> None:
    Path(path).write_text(report_json(report), encoding="utf-8")


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"qkd-sim: config error in {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TypeError as exc:
        print(f"qkd-sim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if "-v" in argv or "--verbose" in argv else logging.WARNING)
    for trial in range(cfg.repeat):
        try:
            _, report = run_scenario(cfg, trial)
        except InvariantViolation as exc:
            print(f"qkd-sim: invariant violated: {exc}", file=sys.stderr)
            return EXIT_INVARIANT
        except OSError as exc:
            print(f"qkd-sim: I/O error: {exc}", file=sys.stderr)
            return EXIT_IO
        log.info("trial %d done", trial)
        claims = " ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in report.claims.items())
        print(f"[{report.protocol}/{report.attack} seed={report.seed}] pulses={report.pulses_sent} "
              f"detections={report.detections} sifted={report.sifted} qber={report.qber:.4f} "
              f"eve={report.eve_knowledge_fraction:.4f} detected={report.detected} {claims}".rstrip())
    return EXIT_OK


def cli() -> None:
    sys.exit(main())
