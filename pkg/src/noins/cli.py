"""``noins`` command line: CA, vehicle, receiver and cost-comparison workflows.

Files stand in for the RSU relay.  Default layout under ``$NOINS_HOME`` (or
``./.noins``)::

    ca.key          CA secrets and issued linkage values (binary)
    trust.bin       receiver trust store (binary)
    vehicle.json    vehicle keystore (JSON)
    request.json    public enrolment request written by ``vehicle keygen``
    batch-N.bin     I2V batch written by ``ca issue``
    bundles/        short-term bundles written by ``vehicle gen``

Exit codes: 0 success, 1 usage, 2 crypto or verification failure, 3 I/O.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import random
import sys
import time
from dataclasses import replace
from pathlib import Path
from typing import Callable

from . import costmodel, selftest, store
from .butterfly import CaterpillarKeyPair, derive_cocoon_private
from .ca import CertificateAuthority
from .errors import FormatError, InvalidCredential, NoinsError
from .group import PROFILES, default_rng, get_group
from .vehicle import GenerationPolicy, accept_credential, gen_short_term, sign_v2x
from .verification import Reason, verify_v2x
from .wire import I2VBatch, Kind, Metadata, V2XAuthMessage, decode, encode

EXIT_OK, EXIT_USAGE, EXIT_CRYPTO, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class IOFailure(Exception):
    pass


class CryptoFailure(Exception):
    """Verification-style failure that still carries a structured result."""

    def __init__(self, result: dict):
        super().__init__(result.get("error", "verification failed"))
        self.result = result


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# --------------------------------------------------------------------------
# context
# --------------------------------------------------------------------------


class Ctx:
    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.home = Path(args.home or os.environ.get("NOINS_HOME") or ".noins")
        self.now = args.now if args.now is not None else int(time.time())

    def rng(self, label: str, *material: bytes):
        """Seeded mode derives a fresh stream from the command and its inputs.

        Mixing inputs in keeps two runs of the same command on different data
        from sharing nonces; without ``--seed`` the OS generator is used.
        """
        if self.args.seed is None:
            return default_rng()
        h = hashlib.sha256(f"{self.args.seed}/{label}".encode())
        for m in material:
            h.update(len(m).to_bytes(8, "big") + m)
        return random.Random(h.digest())

    def path(self, given, name: str) -> Path:
        return Path(given) if given else self.home / name


def _read_bytes(path: Path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise IOFailure(f"cannot read {path}: {exc.strerror or exc}") from exc


def _load(path: Path, parse: Callable[[bytes], object]):
    data = _read_bytes(path)
    try:
        return parse(data)
    except (FormatError, ValueError, UnicodeDecodeError) as exc:
        raise IOFailure(f"{path}: {exc}") from exc


def _write(path: Path, data: bytes) -> None:
    try:
        store.write_atomic(path, data)
    except OSError as exc:
        raise IOFailure(f"cannot write {path}: {exc.strerror or exc}") from exc


# --------------------------------------------------------------------------
# ca
# --------------------------------------------------------------------------


def cmd_ca_init(ctx: Ctx) -> dict:
    a = ctx.args
    key_path, trust_path = ctx.path(a.out, "ca.key"), ctx.path(a.trust, "trust.bin")
    if key_path.exists() and not a.force:
        raise IOFailure(f"{key_path} exists (use --force to overwrite)")
    group = get_group(a.profile)
    expiry = a.cohort_expiry if a.cohort_expiry is not None else ctx.now + 365 * 86400
    ca = CertificateAuthority.create(
        group, a.id_ca.encode(), a.issuer_id, a.cohort, expiry, rng=ctx.rng("ca-init")
    )
    trust = store.trust_from_ca(ca)
    _write(key_path, store.dump_ca(ca))
    _write(trust_path, store.dump_trust(trust))
    return {
        "profile": group.profile,
        "pkc": ca.keys.pkc.encode().hex(),
        "cohorts": [
            {"cohort_id": k.cohort_id, "pks": k.pks.encode().hex(), "expiry": k.expiry}
            for k in trust.keys
        ],
        "ca_key": str(key_path),
        "trust": str(trust_path),
    }


def _read_request(path: Path) -> dict:
    def parse(data):
        doc = json.loads(data)
        group = get_group(doc["profile"])
        return {
            "group": group,
            "X": group.decode_point(bytes.fromhex(doc["X"])),
            "seed": bytes.fromhex(doc["seed"]),
        }

    try:
        return _load(path, parse)
    except KeyError as exc:
        raise IOFailure(f"{path}: missing field {exc}") from exc


def cmd_ca_issue(ctx: Ctx) -> dict:
    a = ctx.args
    key_path = ctx.path(a.ca, "ca.key")
    ca = _load(key_path, store.load_ca)
    req_path = ctx.path(a.request, "request.json")
    req = _read_request(req_path)
    if req["group"] is not ca.group:
        raise UsageError("request and CA use different group profiles")
    if a.batch < 1:
        raise UsageError("--batch must be positive")
    meta = Metadata(ca.issuer_id, ctx.now, ctx.now + a.validity_days * 86400, psid=a.psid)
    rng = ctx.rng("ca-issue", store.dump_ca(ca), _read_bytes(req_path), str(a.start).encode())
    batch = ca.issue_batch(req["X"], req["seed"], meta, a.batch, a.start, a.approach, a.cohort, rng)
    out = ctx.path(a.out, f"batch-{a.start}.bin")
    blob = encode(batch)
    _write(out, blob)
    _write(key_path, store.dump_ca(ca))
    return {"approach": a.approach, "entries": len(batch.entries), "bytes": len(blob), "out": str(out)}


def cmd_ca_attribute(ctx: Ctx) -> dict:
    a = ctx.args
    ca = _load(ctx.path(a.ca, "ca.key"), store.load_ca)
    try:
        slv = bytes.fromhex(a.slv)
    except ValueError:
        raise UsageError("--slv must be hex") from None
    hit = ca.attribute(slv, a.n_cs)
    if hit is None:
        raise CryptoFailure({"found": False, "slv": slv.hex()})
    lv, j = hit
    return {"found": True, "slv": slv.hex(), "lv": lv.hex(), "j": j}


# --------------------------------------------------------------------------
# vehicle
# --------------------------------------------------------------------------


def cmd_vehicle_keygen(ctx: Ctx) -> dict:
    a = ctx.args
    ks_path, req_path = ctx.path(a.keystore, "vehicle.json"), ctx.path(a.request, "request.json")
    if ks_path.exists() and not a.force:
        raise IOFailure(f"{ks_path} exists (use --force to overwrite)")
    group = get_group(a.profile)
    cat = CaterpillarKeyPair.generate(group, ctx.rng("vehicle-keygen"))
    ks = store.Keystore(group, cat)
    request = {
        "version": store.FILE_VERSION,
        "profile": group.profile,
        "X": cat.X.encode().hex(),
        "seed": cat.expansion_seed.hex(),
    }
    _write(ks_path, ks.to_json().encode())
    _write(req_path, (json.dumps(request, indent=1, sort_keys=True) + "\n").encode())
    return {"keystore": str(ks_path), "request": str(req_path), "X": request["X"]}


def _read_keystore(path: Path) -> store.Keystore:
    return _load(path, lambda d: store.Keystore.from_json(d.decode()))


def cmd_vehicle_accept(ctx: Ctx) -> dict:
    a = ctx.args
    ks_path = ctx.path(a.keystore, "vehicle.json")
    ks = _read_keystore(ks_path)
    trust = _load(ctx.path(a.trust, "trust.bin"), store.load_trust)
    batch: I2VBatch = _load(Path(a.batch), lambda d: decode(d, ks.group, expect=Kind.I2V_BATCH))
    live = trust.live_keys(ctx.now)
    accepted = []
    for index, msg in batch.entries:
        cocoon = derive_cocoon_private(ks.caterpillar, index)
        cred, last = None, None
        for key in live:
            try:
                cred = accept_credential(msg, cocoon, trust.pkc, key.pks)
                break
            except InvalidCredential as exc:
                last = exc
        if cred is None:
            raise last or InvalidCredential("no live sanitization key in the trust store")
        ks.credentials.append(store.StoredCredential(index, cred, trust.id_ca, a.n_cs))
        accepted.append(len(ks.credentials) - 1)
    _write(ks_path, ks.to_json().encode())
    return {"accepted": len(accepted), "credentials": accepted}


def cmd_vehicle_gen(ctx: Ctx) -> dict:
    a = ctx.args
    ks_path = ctx.path(a.keystore, "vehicle.json")
    ks = _read_keystore(ks_path)
    if not 0 <= a.cred < len(ks.credentials):
        raise UsageError(f"no credential {a.cred} (keystore holds {len(ks.credentials)})")
    sc = ks.credentials[a.cred]
    policy = GenerationPolicy(sc.n_cs)
    indices = [a.j] if a.j is not None else list(range(sc.next_j, sc.n_cs + 1))
    out_dir = Path(a.out_dir) if a.out_dir else ctx.home / "bundles"
    written = []
    for j in indices:
        rng = ctx.rng("vehicle-gen", encode(sc.cred.cert), j.to_bytes(4, "big"))
        bundle = gen_short_term(sc.cred, j, policy, sc.id_ca, rng)
        path = out_dir / f"c{a.cred}-j{j:02d}.json"
        _write(path, store.bundle_to_json(bundle, a.cred).encode())
        ks.journal.append({"credential": a.cred, "j": j, "slv": bundle.cert.slv.hex(),
                           "file": path.name})
        sc.next_j = max(sc.next_j, j + 1)
        written.append({"j": j, "slv": bundle.cert.slv.hex(), "file": str(path)})
    _write(ks_path, ks.to_json().encode())
    return {"credential": a.cred, "generated": written}


def cmd_vehicle_sign(ctx: Ctx) -> dict:
    a = ctx.args
    bundle_path = Path(a.bundle)
    bundle = _load(bundle_path, lambda d: store.bundle_from_json(d.decode()))
    message = _read_bytes(Path(a.msg))
    rng = ctx.rng("vehicle-sign", _read_bytes(bundle_path), message)
    msg = sign_v2x(bundle, message, rng)
    out = Path(a.out) if a.out else bundle_path.with_suffix(".v2x")
    blob = encode(msg)
    _write(out, blob)
    return {"out": str(out), "bytes": len(blob), "j": bundle.j}


# --------------------------------------------------------------------------
# receiver
# --------------------------------------------------------------------------


def cmd_verify(ctx: Ctx) -> dict:
    a = ctx.args
    trust = _load(ctx.path(a.trust, "trust.bin"), store.load_trust)
    trust = trust.with_clock(lambda: ctx.now)
    data = _read_bytes(Path(a.bundle))
    try:
        msg: V2XAuthMessage = decode(data, trust.group, expect=Kind.V2X_AUTH)
    except FormatError as exc:
        raise CryptoFailure({"accepted": False, "reason": Reason.FORMAT.value, "error": str(exc)})
    if a.msg:
        # the receiver checks the message it actually holds
        msg = replace(msg, message=_read_bytes(Path(a.msg)))
    verdict = verify_v2x(msg, trust)
    result = {
        "accepted": verdict.accepted,
        "reason": verdict.reason.value,
        "pkv": verdict.pkv.encode().hex() if verdict.pkv is not None else None,
        "slv": msg.cert.slv.hex(),
    }
    if not verdict.accepted:
        raise CryptoFailure(result)
    return result


# --------------------------------------------------------------------------
# compare / selftest
# --------------------------------------------------------------------------

CSV_FIELDS = ("scenario", "approach", "n_c", "n_cs", "n_ci", "obtain_bytes", "use_bytes",
              "total_bytes", "obtain_delay_s", "total_delay_s")


def cmd_compare(ctx: Ctx) -> dict:
    a = ctx.args
    try:
        n_c = [int(x) for x in a.n_c.split(",") if x.strip()]
    except ValueError:
        raise UsageError("--n-c takes comma-separated integers") from None
    scenarios = ("small", "large") if a.scenario == "both" else (a.scenario,)
    try:
        reports = costmodel.compare(n_c, scenarios, a.n_cs, rsa_sizes=a.rsa_sizes)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return {
        "assumptions": list(costmodel.ASSUMPTIONS) + (["explicit approach priced with RSA-2048 key and signature sizes"]
                                                      if a.rsa_sizes else []),
        "rows": [{k: r.to_dict()[k] for k in CSV_FIELDS} for r in reports],
        "op_counts": {
            ap: {role: cost.describe() for role, cost in costmodel.op_counts(ap).roles().items()}
            for ap in costmodel.APPROACHES
        },
    }


def render_compare(result: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(result, indent=1, sort_keys=True)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        w.writerows(result["rows"])
        return buf.getvalue().rstrip("\n")
    lines = ["# " + s for s in result["assumptions"]]
    head = f"{'scenario':<8} {'approach':<9} {'n_c':>5} {'obtain B':>10} {'use B':>10} " \
           f"{'obtain s':>9} {'total s':>9}"
    lines += [head, "-" * len(head)]
    for r in result["rows"]:
        lines.append(
            f"{r['scenario']:<8} {r['approach']:<9} {r['n_c']:>5} {r['obtain_bytes']:>10} "
            f"{r['use_bytes']:>10} {r['obtain_delay_s']:>9.4f} {r['total_delay_s']:>9.4f}"
        )
    return "\n".join(lines)


def cmd_selftest(ctx: Ctx) -> dict:
    a = ctx.args
    seed = a.seed if a.seed is not None else 0
    checks = [c.to_dict() for c in selftest.run_oracles(a.backend, seed)]
    result = {"oracles": checks}
    passed = all(c["passed"] for c in checks)
    if a.games:
        games = selftest.run_games(a.trials, seed, get_group(a.profile))
        result["games"] = [dict(t.to_dict(), passed=selftest.game_passes(t)) for t in games]
        passed &= all(g["passed"] for g in result["games"])
    result["passed"] = passed
    if not passed:
        raise CryptoFailure(result)
    return result


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="noins", description=__doc__.split("\n")[0])
    p.add_argument("--home", help="state directory (default $NOINS_HOME or ./.noins)")
    p.add_argument("--profile", choices=sorted(PROFILES), default="production")
    p.add_argument("--seed", type=int, help="deterministic randomness (tests and fixtures only)")
    p.add_argument("--now", type=int, help="clock override, unix seconds")
    p.add_argument("--format", choices=("text", "json"), default="text")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ca = sub.add_parser("ca", help="certificate authority").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    s = ca.add_parser("init", help="create CA keys and a trust store")
    s.add_argument("--id-ca", default="CA01")
    s.add_argument("--issuer-id", type=int, default=1)
    s.add_argument("--cohort", default="default")
    s.add_argument("--cohort-expiry", type=int)
    s.add_argument("--out", help="CA key file")
    s.add_argument("--trust", help="trust store file")
    s.add_argument("--force", action="store_true")
    s.set_defaults(func=cmd_ca_init)

    s = ca.add_parser("issue", help="issue a batch of certificates for a request")
    s.add_argument("--ca")
    s.add_argument("--request")
    s.add_argument("--batch", type=int, default=20)
    s.add_argument("--start", type=int, default=0, help="first cocoon index")
    s.add_argument("--approach", choices=("noins", "simpl", "explicit"), default="noins")
    s.add_argument("--cohort")
    s.add_argument("--validity-days", type=int, default=7)
    s.add_argument("--psid", type=int, default=0x20)
    s.add_argument("--out")
    s.set_defaults(func=cmd_ca_issue)

    s = ca.add_parser("attribute", help="map an observed slv back to (lv, j)")
    s.add_argument("--ca")
    s.add_argument("--slv", required=True)
    s.add_argument("--n-cs", type=int, default=50)
    s.set_defaults(func=cmd_ca_attribute)

    veh = sub.add_parser("vehicle", help="vehicle role").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    s = veh.add_parser("keygen", help="create a caterpillar key and enrolment request")
    s.add_argument("--keystore")
    s.add_argument("--request")
    s.add_argument("--force", action="store_true")
    s.set_defaults(func=cmd_vehicle_keygen)

    s = veh.add_parser("accept", help="decrypt and check an I2V batch")
    s.add_argument("--batch", required=True)
    s.add_argument("--keystore")
    s.add_argument("--trust")
    s.add_argument("--n-cs", type=int, default=50)
    s.set_defaults(func=cmd_vehicle_accept)

    s = veh.add_parser("gen", help="generate short-term bundles")
    s.add_argument("--keystore")
    s.add_argument("--cred", type=int, default=0)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--j", type=int)
    g.add_argument("--all", action="store_true")
    s.add_argument("--out-dir")
    s.set_defaults(func=cmd_vehicle_gen)

    s = veh.add_parser("sign", help="sign a message with a bundle")
    s.add_argument("--bundle", required=True)
    s.add_argument("--msg", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_vehicle_sign)

    s = sub.add_parser("verify", help="verify a V2X authentication message")
    s.add_argument("--bundle", required=True, help="encoded V2X message")
    s.add_argument("--msg", help="message body actually received (replaces the embedded one)")
    s.add_argument("--trust")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("compare", help="communication cost comparison")
    s.add_argument("--n-c", default="500,1000,3000")
    s.add_argument("--scenario", choices=("small", "large", "both"), default="both")
    s.add_argument("--n-cs", type=int, default=50)
    s.add_argument("--rsa-sizes", action="store_true", help="price the explicit approach with RSA-2048 sizes")
    s.add_argument("--format", dest="table_format", choices=("table", "csv", "json"))
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("selftest", help="toy-profile exhaustive oracles")
    s.add_argument("--games", action="store_true", help="also run the security games")
    s.add_argument("--trials", type=int, default=200)
    s.add_argument("--backend", choices=("numba", "numpy"))
    s.set_defaults(func=cmd_selftest)
    return p


def _emit(result: dict, args, out) -> None:
    if args.command == "compare":
        fmt = getattr(args, "table_format", None) or ("json" if args.format == "json" else "table")
        print(render_compare(result, fmt), file=out)
    elif args.format == "json":
        print(json.dumps(result, indent=1, sort_keys=True), file=out)
    else:
        for k, v in result.items():
            if isinstance(v, (dict, list)):
                v = json.dumps(v, sort_keys=True)
            print(f"{k}: {v}", file=out)


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=err)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    try:
        result = args.func(Ctx(args))
    except UsageError as exc:
        print(f"usage error: {exc}", file=err)
        return EXIT_USAGE
    except IOFailure as exc:
        print(f"i/o error: {exc}", file=err)
        return EXIT_IO
    except CryptoFailure as exc:
        _emit(exc.result, args, out)
        return EXIT_CRYPTO
    except NoinsError as exc:
        print(f"crypto error: {type(exc).__name__}: {exc}", file=err)
        return EXIT_CRYPTO
    _emit(result, args, out)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
