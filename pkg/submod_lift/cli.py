"""
Command line interface for submod-lift.
"""
import argparse
import logging
import sys
from dataclasses import replace
from typing import Any, Dict, List, Optional

from .blockers import BlockingFamily, verify_blocker
from .config import Settings
from .corpus import GENERATORS, generate_corpus, write_corpus
from .exceptions import (BoundViolationError, CapExceededError, InfeasibleError,
                         InstanceParseError, StageError, SubmodError)
from .harness import ALGORITHMS, RunOptions, bench, run
from .matroids import Matroid, verify_matroid_axioms
from .oracles import validate_multimonotone, validate_multisubmodular
from .parser import Problem, parse_instance
from .utils import canonical_json

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2
EXIT_BOUND = 3
EXIT_PARSE = 4
EXIT_CAP = 5


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="submod-lift",
        description="Multi-agent submodular optimization through lifting reductions"
    )
    parser.add_argument(
        '--verbose',
        '-v',
        action='store_true',
        help='Log solver progress at DEBUG level'
    )
    parser.add_argument(
        '--brute-cap',
        type=int,
        help='Largest ground set solved by brute force'
    )
    commands = parser.add_subparsers(dest='command', required=True)

    def instance_command(name: str, help_text: str) -> argparse.ArgumentParser:
        command = commands.add_parser(name, help=help_text)
        command.add_argument('--instance', '-i', required=True, help='Path to instance file')
        command.add_argument('--out', '-o', help='Output file (default: stdout)')
        return command

    solve = instance_command('solve', 'Solve every instance in a file')
    solve.add_argument('--algorithm', '-a', required=True, choices=sorted(ALGORITHMS),
                       help='Algorithm id')
    solve.add_argument('--tau', type=int, help='Override the robustness budget')
    solve.add_argument('--force-brute', action='store_true',
                       help='Compute the brute-force optimum even above the caps')
    solve.add_argument('--no-brute', action='store_true',
                       help='Skip the brute-force optimum')
    solve.add_argument('--timings', action='store_true', help='Include wall times in reports')
    solve.add_argument('--seed', type=int,
                       help='Seed for randomized algorithms (default: the instance seed)')

    instance_command('lp', 'Solve the covering LP relaxation only')
    instance_command('verify', 'Check oracle and constraint properties by enumeration')

    gen = commands.add_parser('gen', help='Generate a benchmark corpus')
    gen.add_argument('--family', '-f', required=True, choices=sorted(GENERATORS),
                     help='Corpus family')
    gen.add_argument('--n', type=int, default=6, help='Elements (nodes for graph families)')
    gen.add_argument('--k', type=int, default=2, help='Agents')
    gen.add_argument('--count', type=int, default=10, help='Number of instances')
    gen.add_argument('--seed', type=int, default=0, help='Random seed')
    gen.add_argument('--out', '-o', required=True, help='Instance file to write')

    bench_cmd = instance_command('bench', 'Run algorithms over a corpus')
    bench_cmd.add_argument('--algorithm', '-a', action='append', choices=sorted(ALGORITHMS),
                           help='Algorithm id (repeatable; default: all compatible)')
    bench_cmd.add_argument('--workers', type=int, default=1, help='Parallel runs')
    bench_cmd.add_argument('--records', help='Also write per-run records to this file')
    bench_cmd.add_argument('--force-brute', action='store_true',
                           help='Compute brute-force optima even above the caps')
    bench_cmd.add_argument('--timings', action='store_true', help='Include wall times')
    bench_cmd.add_argument('--seed', type=int,
                           help='Seed for randomized algorithms (default: the instance seed)')
    return parser


def _emit(lines: List[str], path: Optional[str]) -> None:
    text = "\n".join(lines)
    if path:
        with open(path, 'w', encoding='utf-8') as f:
            f.write(text + ("\n" if lines else ""))
        print(f"Wrote {len(lines)} records to {path}", file=sys.stderr)
    elif lines:
        print(text)


def _solve(args: argparse.Namespace, settings: Settings, problems: List[Problem]) -> int:
    options = RunOptions(brute=not args.no_brute, force_brute=args.force_brute,
                         timings=args.timings, seed=args.seed)
    records = []
    for problem in problems:
        if args.tau is not None:
            problem = replace(problem, tau=args.tau)
        records.append(run(problem, args.algorithm, options, settings))
    _emit([record.to_json() for record in records], args.out)
    return EXIT_OK if all(record.ok for record in records) else EXIT_BOUND


def _lp(args: argparse.Namespace, settings: Settings, problems: List[Problem]) -> int:
    records = [run(replace(problem, task="lp"), "lp", RunOptions(brute=False), settings)
               for problem in problems]
    _emit([record.to_json() for record in records], args.out)
    return EXIT_OK if all(record.ok for record in records) else EXIT_BOUND


def _verify_problem(problem: Problem, settings: Settings) -> Dict[str, Any]:
    checks = [validate_multisubmodular(problem.oracle, settings),
              validate_multimonotone(problem.oracle, settings)]
    if isinstance(problem.family, Matroid):
        checks.append(verify_matroid_axioms(problem.family, settings))
    if isinstance(problem.family, BlockingFamily):
        checks.append(verify_blocker(problem.family, settings))
    return {"digest": problem.digest, "instance": problem.name,
            "checks": [check.to_dict() for check in checks]}


def _verify(args: argparse.Namespace, settings: Settings, problems: List[Problem]) -> int:
    _emit([canonical_json(_verify_problem(problem, settings)) for problem in problems], args.out)
    return EXIT_OK


def _bench(args: argparse.Namespace, settings: Settings, problems: List[Problem]) -> int:
    options = RunOptions(force_brute=args.force_brute, timings=args.timings, seed=args.seed)
    result = bench(problems, args.algorithm, options, settings, workers=args.workers)
    if args.records:
        _emit([record.to_json() for record in result.records], args.records)
    _emit([canonical_json(row.to_dict()) for row in result.summary], args.out)
    for record in result.violations:
        print(f"Bound violation: {record.to_json()}", file=sys.stderr)
    return EXIT_BOUND if result.violations else EXIT_OK


COMMANDS = {'solve': _solve, 'lp': _lp, 'verify': _verify, 'bench': _bench}


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    settings = Settings.from_env().with_overrides(brute_cap=args.brute_cap)

    try:
        if args.command == 'gen':
            records = generate_corpus(args.family, args.n, args.k, args.count, args.seed,
                                      settings)
            path, count = write_corpus(args.out, records)
            print(f"Generated {count} {args.family} instances to {path}")
            return EXIT_OK
        problems = parse_instance(args.instance, settings)
        return COMMANDS[args.command](args, settings, problems)

    except InstanceParseError as e:
        print(f"Error: {str(e)}", file=sys.stderr)
        return EXIT_PARSE
    except InfeasibleError as e:
        print(f"Error: {str(e)}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (BoundViolationError, StageError) as e:
        print(f"Error: {str(e)}", file=sys.stderr)
        return EXIT_BOUND
    except CapExceededError as e:
        print(f"Error: {str(e)}", file=sys.stderr)
        return EXIT_CAP
    except FileNotFoundError as e:
        print(f"Error: {str(e)}", file=sys.stderr)
        return EXIT_ERROR
    except SubmodError as e:
        print(f"Error: {str(e)}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as e:
        logger.debug("unexpected failure", exc_info=True)
        print(f"Error: {str(e)}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == '__main__':
    sys.exit(main())
