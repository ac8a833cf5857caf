"""Command-line frontend: ``khcob <subcommand> <input> [flags]``.

Exit status: 0 success, 1 unreadable input or bad flags, 2 a mathematical
integrity check failed, 3 the crossing-count guard refused the input.
"""

from __future__ import annotations

import argparse
import json
import sys

from .bs import SIGN_RULES, bs_complex, sign_rule_iso
from .ckom import ChainMap, IntegrityError, filtration_level
from .cobcat import CobError
from .coeff import RingError, ring_make
from .diagram import CONVENTIONS, DiagramError, parse_tangle
from .moves import format_movie, movie_map, parse_movie, sep_movie, sep_square, split_movie
from .tqft import NotAField, homology, induced_map, kj_number, spectral_pages

COMMANDS = ("kh", "khbs", "ss", "movie", "kj", "sep", "verify")


class UsageError(Exception):
    pass


class GuardError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # argparse would exit with 2, which is reserved for integrity failures
        raise UsageError(message)


def _parser():
    p = _Parser(prog="khcob", description="Khovanov and Batson-Seed homology of "
                                "weighted tangles, and the maps induced by movies.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("input", help="a .tng or .movie file, or a suite name for verify")
    p.add_argument("--ring", help="Z, Q or Fp:N (default Z for kh, Q otherwise)")
    p.add_argument("--sign-rule", choices=SIGN_RULES, default="paper")
    p.add_argument("--shading", choices=CONVENTIONS)
    p.add_argument("--max-crossings", type=int, default=16)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    return p


def _read(path):
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}")


def _guard(n, args):
    if n > args.max_crossings:
        raise GuardError(f"{n} crossings exceeds --max-crossings {args.max_crossings}")


def _ring(args, default):
    return ring_make(args.ring or default)


def _tangle(args, default_ring):
    ring = _ring(args, default_ring)
    d = parse_tangle(_read(args.input), ring, args.shading)
    _guard(d.n, args)
    return d


def _movie(args):
    m = parse_movie(_read(args.input), _ring(args, "Q"), args.shading)
    _guard(max(f.n for f in m.frames()), args)
    return m


def _rule_conjugate(f: ChainMap, rule, d0, d1):
    """Carry a map between default-rule complexes of d0 and d1 over to the
    ``rule`` complexes."""
    if rule == "paper":
        return f
    src, tgt = sign_rule_iso(d0, "paper", rule), sign_rule_iso(d1, "paper", rule)
    back = ChainMap(src.target, src.source, src.blocks)  # the sign matrix is its own inverse
    return back.then(ChainMap(src.source, f.target, f.blocks)).then(
        ChainMap(f.target, tgt.target, tgt.blocks))


# ---------------------------------------------------------------------------
# subcommands

def cmd_kh(args):
    d = _tangle(args, "Z")
    return homology(bs_complex(d, args.sign_rule), "kh", d.ring).to_json()


def cmd_khbs(args):
    d = _tangle(args, "Q")
    return homology(bs_complex(d, args.sign_rule), "bs", d.ring).to_json()


def cmd_ss(args):
    d = _tangle(args, "Q")
    p = spectral_pages(bs_complex(d, args.sign_rule), d.ring)

    def table(t):
        return [{"l": l, "j": j, "dim": n} for (l, j), n in sorted(t.items()) if n]

    return {"ring": d.ring.spec, "collapse": p.collapse,
            "pages": {str(k): table(t) for k, t in sorted(p.pages.items())},
            "infinity": table(p.infinity)}


def cmd_movie(args):
    m = _movie(args)
    ring = m.initial.ring
    f = _rule_conjugate(movie_map(m), args.sign_rule, m.initial, m.final())
    deg = f.degree()
    return {"ring": ring.spec, "degree": deg, "filtration_level": filtration_level(f),
            "kh": induced_map(f, "kh", ring).to_json(ring),
            "bs": induced_map(f, "bs", ring).to_json(ring)}


def cmd_kj(args):
    m = _movie(args)
    ring = m.initial.ring
    return {"ring": ring.spec, "kj": ring.to_json(kj_number(m))}


def cmd_sep(args):
    m = _movie(args)
    ring = m.initial.ring
    s = sep_movie(m)
    res = sep_square(m)
    out = {"ring": ring.spec, "changed_crossings": sorted(s.changed), "sep_movie": format_movie(s.movie),
           "square": {"commutes": res is not None,
                      "unit": None if res is None else ring.to_json(res.unit)}}
    if s.movie.initial.is_link() and _split_ends(s.movie):
        out["split_movie"] = format_movie(split_movie(s.movie))
    else:
        out["split_movie"] = None
    return out


def _split_ends(m):
    from .moves import to_separate

    return not to_separate(m.initial) and not to_separate(m.final())


def cmd_verify(args):
    from . import suites

    names = list(suites.SUITES) if args.input == "all" else [args.input]
    for n in names:
        if n not in suites.SUITES:
            raise UsageError(f"unknown suite {n!r}; choose from all, {', '.join(suites.SUITES)}")
    print(f"seed {args.seed}", file=sys.stderr)
    if args.jobs > 1 and len(names) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(args.jobs) as pool:
            chunks = list(pool.map(suites.run, names, [args.seed] * len(names)))
    else:
        chunks = [suites.run(n, args.seed) for n in names]
    results = [r for chunk in chunks for r in chunk]
    for suite, check, msg in results:
        print(f"{'PASS' if msg is None else 'FAIL'} {suite}: {check}" + ("" if msg is None else f" ({msg})"),
              file=sys.stderr)
    failed = [r for r in results if r[2] is not None]
    report = {"seed": args.seed, "passed": len(results) - len(failed), "failed": len(failed),
              "checks": [{"suite": s, "check": c, "ok": m is None, "message": m} for s, c, m in results]}
    if failed:
        raise _VerifyFailed(report)
    return report


class _VerifyFailed(Exception):
    def __init__(self, report):
        super().__init__(f"{report['failed']} checks failed")
        self.report = report


HANDLERS = {"kh": cmd_kh, "khbs": cmd_khbs, "ss": cmd_ss, "movie": cmd_movie, "kj": cmd_kj,
            "sep": cmd_sep, "verify": cmd_verify}


def _emit(obj, args):
    text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    parser = _parser()
    try:
        args = parser.parse_args(argv)
        if args.max_crossings < 0 or args.jobs < 1:
            raise UsageError("--max-crossings must be >= 0 and --jobs >= 1")
        _emit(HANDLERS[args.command](args), args)
        return 0
    except (UsageError, DiagramError, RingError, CobError, NotAField) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except GuardError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 3
    except _VerifyFailed as exc:
        _emit(exc.report, args)
        print(f"integrity failure: {exc}", file=sys.stderr)
        return 2
    except IntegrityError as exc:
        print(f"integrity failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
