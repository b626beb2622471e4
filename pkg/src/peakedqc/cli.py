"""Command-line workflow: generate, publish, sample, verify, plus calculators.

The challenge format splits an instance into a public file (the bare
circuit plus a hash commitment to the peak string) and a private file (the
peak string, its weight, generation metadata and the commitment salt).
The commitment lets a challenger audit after the fact that the verifier
never moved the goalposts.  File writes are atomic (temp file + rename)
and every output embeds the fully-resolved run configuration.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass

from . import bounds as bounds_mod
from . import noise as noise_mod
from . import perturb as perturb_mod
from . import stitch as stitch_mod
from . import synth as synth_mod
from .ensembles import (
    OverlapStats,
    PeakedInstance,
    conditioned_generate,
    hs_overlap,
    instance_from_json,
    instance_to_json,
    postselect_generate,
    random_brickwall,
)
from .sim import (
    SampleSet,
    as_rng,
    circuit_from_json,
    circuit_to_json,
    sample as sim_sample,
)


def write_atomic(path: str, text: str) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_json(path: str, obj) -> None:
    write_atomic(path, json.dumps(obj, indent=1))


def read_json(path: str):
    with open(path) as fh:
        return json.load(fh)


def commitment_digest(peak_string: str, salt: bytes) -> str:
    return hashlib.sha256(peak_string.encode() + salt).hexdigest()


@dataclass
class Challenge:
    """Public circuit + commitment, private witness + salt."""

    public: dict
    private: dict

    @classmethod
    def from_instance(cls, inst: PeakedInstance, rng, config: dict, plan: dict | None = None) -> "Challenge":
        salt = rng.bytes(16)
        # the public side must carry no generation parameters: the seed alone
        # would let a challenger regenerate the instance and read off the peak
        public = {
            "n": inst.circuit.n,
            "circuit": circuit_to_json(inst.circuit),
            "commitment": commitment_digest(inst.peak_string, salt),
            "config": {"command": config.get("command"), "n": inst.circuit.n},
        }
        private = {
            "n": inst.circuit.n,
            "peak_string": inst.peak_string,
            "peakedness": inst.peakedness,
            "peakedness_is_predicted": inst.peakedness_is_predicted,
            "method": inst.method,
            "seed": inst.seed,
            "salt": salt.hex(),
            "commitment": public["commitment"],
            "circuit": circuit_to_json(inst.circuit),
            "plan": plan,
            "config": config,
        }
        return cls(public, private)

    def check_commitment(self) -> bool:
        return self.public["commitment"] == commitment_digest(
            self.private["peak_string"], bytes.fromhex(self.private["salt"])
        )


def _load_private(path: str) -> dict:
    obj = read_json(path)
    if "peak_string" not in obj:
        raise SystemExit(f"{path} is not a private challenge file (no peak data)")
    return obj


# ---------------------------------------------------------------------------
# noise spec parsing: bsc:0.05 | tsparse:2[:policy] | depol:0.3


def parse_noise(spec: str | None, target: str | None = None):
    if spec is None:
        return None
    parts = spec.split(":")
    kind = parts[0]
    if kind == "bsc":
        return noise_mod.BSC(float(parts[1]))
    if kind == "depol":
        return noise_mod.GlobalDepolarizing(float(parts[1]))
    if kind == "tsparse":
        policy = parts[2] if len(parts) > 2 else "random-subset"
        return noise_mod.TSparse(int(parts[1]), policy=policy, target=target)
    raise SystemExit(f"unknown noise spec {spec!r}")


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen(args) -> int:
    rng = as_rng(args.seed)
    config = vars(args).copy()
    config.pop("func", None)
    plan_obj = None

    if args.method == "postselect":
        if args.conditioned:
            inst = conditioned_generate(args.n, args.delta, x_star=args.x_star, seed=args.seed)
            trials = 1
        else:
            inst, trials = postselect_generate(
                args.n, args.delta, x_star=args.x_star,
                max_trials=args.max_trials, seed=args.seed, depth=args.depth,
            )
        print(f"postselect: accepted after {trials} trials, peakedness {inst.peakedness:.6f}")
    elif args.method == "variational":
        depth = args.depth or args.n
        target = random_brickwall(args.n, depth, rng)
        inst, report = synth_mod.multistart_search(
            target, x_star=args.x_star, delta_target=args.delta,
            n_seeds=args.seeds, iters=args.iters,
            hyper=synth_mod.AdamParams(lr=args.lr, beta1=args.beta1, beta2=args.beta2),
            seed=args.seed,
        )
        print(
            f"variational: best p0 {report.best_peakedness:.6f} "
            f"(target {args.delta}) in {report.wall_time:.1f}s"
        )
        if args.history_out:
            lines = ["seed,iter,p0"]
            for trace in report.per_seed_traces:
                lines += [f"{trace.seed_index},{it},{p0}" for it, p0 in trace.history]
            write_atomic(args.history_out, "\n".join(lines) + "\n")
        if report.below_target:
            print("below-target: synthesis did not reach the requested peakedness", file=sys.stderr)
            _write_challenge(inst, rng, config, args.out_prefix, plan_obj)
            return 1
    elif args.method == "stitched":
        insts = [instance_from_json(read_json(p)) for p in args.blocks]
        path = args.path.split(",") if args.path else None
        plan = stitch_mod.make_plan(insts, path)
        _, inst, boundaries = stitch_mod.stitch(plan)
        plan_obj = {
            "path": plan.path,
            "leakages": plan.leakages,
            "boundaries": boundaries,
            "blocks": [instance_to_json(b, include_factors=False) for b in insts],
        }
        print(
            f"stitched {len(insts)} blocks, peakedness {inst.peakedness:.6f}"
            f"{' (predicted)' if inst.peakedness_is_predicted else ''}"
        )
    else:
        raise SystemExit(f"unknown method {args.method!r}")

    _write_challenge(inst, rng, config, args.out_prefix, plan_obj)
    return 0


def _write_challenge(inst, rng, config, out_prefix, plan_obj):
    challenge = Challenge.from_instance(inst, rng, config, plan_obj)
    write_json(f"{out_prefix}.public.json", challenge.public)
    write_json(f"{out_prefix}.private.json", challenge.private)
    print(f"wrote {out_prefix}.public.json and {out_prefix}.private.json")


def cmd_sample(args) -> int:
    obj = read_json(args.challenge)
    circuit = circuit_from_json(obj["circuit"])
    n = circuit.n
    target = obj.get("peak_string")
    model = parse_noise(args.noise, target)
    samples = sim_sample(
        circuit, "0" * n, args.shots, seed=args.seed,
        meta={"instance_id": os.path.basename(args.challenge)},
    )
    if model is not None:
        samples = noise_mod.apply_noise(samples, model, seed=args.seed)
    if args.json:
        write_json(args.out, {"n": n, "shots": samples.shots, "meta": _clean_meta(samples.meta)})
    else:
        write_atomic(args.out, "\n".join(samples.shots) + "\n")
    print(f"wrote {args.shots} shots to {args.out}")
    return 0


def _clean_meta(meta: dict) -> dict:
    return {k: v for k, v in meta.items() if isinstance(v, (str, int, float, bool, type(None)))}


def load_shots(path: str) -> SampleSet:
    with open(path) as fh:
        text = fh.read().strip()
    if text.startswith("{"):
        obj = json.loads(text)
        return SampleSet(obj["n"], obj["shots"], obj.get("meta", {}))
    shots = text.split()
    return SampleSet(len(shots[0]), shots, {})


def cmd_verify(args) -> int:
    private = _load_private(args.private)
    samples = load_shots(args.shots)
    x_star = private["peak_string"]
    claimed = private["peakedness"]
    n = private["n"]

    t = args.t
    if args.noise and args.noise.startswith("bsc"):
        r = float(args.noise.split(":")[1])
        plan = noise_mod.plan_samples("majority", n=n, p_max=max(claimed, 1e-6), r=r, eta=0.1)
        t = plan.hba_radius if t is None else t
    t = 0 if t is None else t

    if args.decoder == "majority":
        decoded = noise_mod.majority_decode(samples)
    elif args.decoder == "center":
        decoded, _ = noise_mod.hamming_center_decode(samples, max(t, 1))
    else:
        decoded = x_star  # hba estimates around the known witness
    report = noise_mod.hba_estimate(samples, decoded, t)
    estimate = report.estimate

    if args.depol:
        estimate = noise_mod.debias_depolarizing(estimate, args.depol, n).estimate

    salt = bytes.fromhex(private["salt"])
    commitment_ok = commitment_digest(decoded, salt) == private["commitment"]
    tolerance = args.tolerance if args.tolerance is not None else max(3 * report.std_err + report.bias_bound, 1e-3)
    weight_ok = abs(estimate - claimed) <= tolerance

    verdict = {
        "accept": bool(commitment_ok and weight_ok),
        "decoded_string": decoded,
        "commitment_matches": bool(commitment_ok),
        "estimate": estimate,
        "claimed": claimed,
        "tolerance": tolerance,
        "decoder": args.decoder,
        "hba_radius": t,
        "estimate_report": {
            "estimate": report.estimate,
            "std_err": report.std_err,
            "bias_bound": report.bias_bound,
            "params": report.params,
        },
    }
    text = json.dumps(verdict, indent=1)
    if args.out:
        write_atomic(args.out, text)
    print(text)
    if not commitment_ok:
        print("reject: decoded string does not match the commitment", file=sys.stderr)
    elif not weight_ok:
        print("reject: peak-weight estimate is off the claimed value", file=sys.stderr)
    return 0 if verdict["accept"] else 1


def cmd_stats(args) -> int:
    rows = []
    for n in args.n:
        depth = args.depth or n
        trace_vals = []
        for i in range(args.instances):
            seed = (args.seed or 0) * 1_000_003 + 7919 * n + i
            target = random_brickwall(n, depth, seed)
            inst, report = synth_mod.multistart_search(
                target, delta_target=args.delta, n_seeds=args.seeds, iters=args.iters,
                seed=seed, history_stride=max(1, args.iters // 10),
            )
            tsq, hs = hs_overlap(*inst.factors)
            trace_vals.append(tsq)
            iters_used = max(tr.iterations for tr in report.per_seed_traces)
            rows.append(f"{n},{i},{tsq},{hs},{inst.peakedness},{iters_used}")
        stats = OverlapStats.from_trace_sq(n, trace_vals)
        rows.append(
            f"# summary n={n}: mean_trace_sq={stats.mean_trace_sq:.4f} "
            f"se={stats.std_err:.4f} mean_hs_norm_sq={stats.mean_hs_norm_sq:.3e}"
        )
        print(rows[-1])
    header = "n,instance_id,trace_sq,hs_norm_sq,peakedness,iterations"
    text = header + "\n" + "\n".join(rows) + "\n"
    if args.out:
        write_atomic(args.out, text)
        print(f"wrote {args.out}")
    else:
        print(text)
    return 0


def cmd_stitch(args) -> int:
    insts = [instance_from_json(read_json(p)) for p in args.blocks]
    path = args.path.split(",") if args.path else None
    plan = stitch_mod.make_plan(insts, path)
    circuit, inst, boundaries = stitch_mod.stitch(plan)
    if args.rewrite:
        res = stitch_mod.boundary_rewrite(circuit, seed=args.seed, boundaries=boundaries)
        inst.circuit = res.circuit
    obj = instance_to_json(inst, include_factors=False)
    obj["plan"] = {"path": plan.path, "leakages": plan.leakages, "boundaries": boundaries}
    write_json(args.out, obj)
    print(
        f"stitched {len(insts)} blocks -> {args.out}, peakedness {inst.peakedness:.6f}"
        f"{' (predicted)' if inst.peakedness_is_predicted else ''}"
    )
    return 0


def cmd_perturb(args) -> int:
    base = circuit_from_json(read_json(args.base)["circuit"])
    target = circuit_from_json(read_json(args.target)["circuit"])
    path = perturb_mod.make_path(base, target)
    x_star = args.x_star or "0" * base.n
    thetas = [float(t) for t in args.theta.split(",")]
    lines = ["theta,p0,p0_truncated,tv_bound"]
    tpath = perturb_mod.TruncatedPath(path, args.K) if args.K is not None else None
    for theta in thetas:
        from .sim import amplitude as amp
        p0 = abs(amp(perturb_mod.materialize(path, theta), "0" * base.n, x_star)) ** 2
        p0_tr = ""
        if tpath is not None:
            p0_tr = abs(amp(perturb_mod.materialize_truncated(tpath, theta).circuit, "0" * base.n, x_star)) ** 2
        chk = perturb_mod.tv_peakedness_check(path, theta, x_star)
        lines.append(f"{theta},{p0},{p0_tr},{chk.bound}")
    text = "\n".join(lines) + "\n"
    if args.out:
        write_atomic(args.out, text)
        print(f"wrote {args.out}")
    else:
        print(text)
    return 0


def cmd_bounds(args) -> int:
    consts = bounds_mod.BoundConstants()
    kind = args.kind
    if kind == "acceptance":
        rep = bounds_mod.acceptance_haar(args.d, args.delta).as_dict()
    elif kind == "tail":
        rep = bounds_mod.acceptance_kdesign_bound(args.d, args.delta, args.k).as_dict()
    elif kind == "covering":
        rep = bounds_mod.covering_log(args.n, args.s, args.eps, consts).as_dict()
    elif kind == "packing":
        rep = bounds_mod.packing_log(args.d, args.k, args.delta, consts).as_dict()
    elif kind == "compression":
        rep = bounds_mod.compression_probability_bound(
            args.n, args.k, args.s, args.eps, args.delta, consts
        ).as_dict()
    elif kind == "lb":
        gb = bounds_mod.gate_count_lower_bound(args.n, args.k, consts)
        rep = gb.report.as_dict()
        rep["s_star"] = gb.s_star
        rep["regime"] = gb.regime
    elif kind == "fidelity":
        fb = bounds_mod.peak_to_fidelity(args.delta, args.eps)
        rep = fb.report.as_dict()
        rep["f_min"] = fb.f_min
        rep["one_minus_f_relaxation"] = fb.relaxation
    else:
        raise SystemExit(f"unknown bounds kind {kind!r}")
    text = json.dumps(rep, indent=1)
    if args.out:
        write_atomic(args.out, text)
    print(text)
    return 0


# ---------------------------------------------------------------------------
# argument wiring


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="peakedqc",
        description="generate, sample and verify random peaked circuit challenges",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a challenge (public/private pair)")
    g.add_argument("--method", choices=["postselect", "variational", "stitched"], required=True)
    g.add_argument("--n", type=int, default=4)
    g.add_argument("--depth", type=int, default=None)
    g.add_argument("--delta", type=float, default=0.5)
    g.add_argument("--x-star", dest="x_star", default=None)
    g.add_argument("--seeds", type=int, default=3, help="multi-start count (variational)")
    g.add_argument("--iters", type=int, default=1000)
    g.add_argument("--lr", type=float, default=0.05)
    g.add_argument("--beta1", type=float, default=0.9)
    g.add_argument("--beta2", type=float, default=0.999)
    g.add_argument("--max-trials", dest="max_trials", type=int, default=100000)
    g.add_argument("--conditioned", action="store_true",
                   help="draw the accepted postselection law directly (no rejection)")
    g.add_argument("--blocks", nargs="*", default=[], help="private instance files (stitched)")
    g.add_argument("--path", default=None, help="comma-separated peak path (stitched)")
    g.add_argument("--history-out", dest="history_out", default=None)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out-prefix", dest="out_prefix", default="challenge")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("sample", help="run the reference prover on a challenge")
    s.add_argument("--challenge", required=True, help="public or private challenge file")
    s.add_argument("--shots", type=int, default=1000)
    s.add_argument("--noise", default=None, help="bsc:R | tsparse:T[:policy] | depol:E")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default="shots.txt")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_sample)

    v = sub.add_parser("verify", help="decode submitted shots against a private challenge")
    v.add_argument("--private", required=True)
    v.add_argument("--shots", required=True)
    v.add_argument("--decoder", choices=["majority", "center", "hba"], default="hba")
    v.add_argument("--t", type=int, default=None, help="Hamming-ball radius")
    v.add_argument("--noise", default=None, help="assumed channel, e.g. bsc:0.05")
    v.add_argument("--depol", type=float, default=None, help="de-bias strength eps")
    v.add_argument("--tolerance", type=float, default=None)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out", default=None)
    v.set_defaults(func=cmd_verify)

    st = sub.add_parser("stats", help="batch-synthesize and collect overlap statistics")
    st.add_argument("--n", type=int, nargs="+", default=[6])
    st.add_argument("--depth", type=int, default=None, help="default: depth = n")
    st.add_argument("--instances", type=int, default=10)
    st.add_argument("--delta", type=float, default=0.95)
    st.add_argument("--seeds", type=int, default=2)
    st.add_argument("--iters", type=int, default=2000)
    st.add_argument("--seed", type=int, default=0)
    st.add_argument("--out", default=None)
    st.set_defaults(func=cmd_stats)

    sc = sub.add_parser("stitch", help="compose peaked blocks along a tracked path")
    sc.add_argument("--blocks", nargs="+", required=True)
    sc.add_argument("--path", default=None)
    sc.add_argument("--rewrite", action="store_true", help="blur the seams afterwards")
    sc.add_argument("--seed", type=int, default=0)
    sc.add_argument("--out", default="stitched.json")
    sc.set_defaults(func=cmd_stitch)

    p = sub.add_parser("perturb", help="interpolate toward a target circuit, tabulate p0(theta)")
    p.add_argument("--base", required=True, help="instance/challenge file with a circuit")
    p.add_argument("--target", required=True)
    p.add_argument("--theta", default="0.0,0.001,0.01,0.1,1.0")
    p.add_argument("--K", type=int, default=None, help="also tabulate the order-K truncation")
    p.add_argument("--x-star", dest="x_star", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_perturb)

    b = sub.add_parser("bounds", help="closed-form calculators (log-space)")
    b.add_argument("kind", choices=["acceptance", "tail", "covering", "packing", "compression", "lb", "fidelity"])
    b.add_argument("--d", type=int, default=16)
    b.add_argument("--n", type=int, default=4)
    b.add_argument("--k", type=int, default=None)
    b.add_argument("--s", type=int, default=10)
    b.add_argument("--delta", type=float, default=0.5)
    b.add_argument("--eps", type=float, default=0.1)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", default=None)
    b.add_argument("--json", action="store_true")
    b.set_defaults(func=cmd_bounds)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
