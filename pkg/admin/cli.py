"""
Ligne de commande du laboratoire Cu-VRP.

Usage:
    python -m admin.cli run --instance inst.json --policy dispatch --seed 7
    python -m admin.cli ratio --which crossover --out crossover.csv
    python -m admin.cli lpverify 1.444 1 300
    python -m admin.cli oracle --instance inst.json
    python -m admin.cli gen --n 6 --metric line --demands two-point --seed 3 --out inst.json
    python -m admin.cli initdb --reset
"""

import argparse
import logging
import math
import sys
from typing import Dict, List, Optional

from shared.errors import EXIT_OK, ConfigError, CuVRPError
from shared.instance import Instance, load_instance, save_instance
from shared.itinerary import cumulative_cost
from shared.log import get_logger, setup_logger
from shared.seeding import STREAM_DEMANDS, SeedStreams

logger = get_logger('cli')


# ============================================
# INSTANCE ET PARAMÈTRES
# ============================================

def _add_generator_args(parser: argparse.ArgumentParser):
    from solver.generator import DemandFamily, MetricFamily

    group = parser.add_argument_group('générateur')
    group.add_argument('--n', type=int, default=6, help='nombre de clients')
    group.add_argument('--metric', default=MetricFamily.EUCLIDEAN.value,
                       choices=[m.value for m in MetricFamily])
    group.add_argument('--demands', default='mixed', choices=[d.value for d in DemandFamily])
    group.add_argument('--a', type=float, default=1.0, help='coût du véhicule vide par unité de distance')
    group.add_argument('--b', type=float, default=1.0, help='coût par unité de marchandise et de distance')
    group.add_argument('--Q', type=float, default=1.0, help='capacité (unités d\'origine)')
    group.add_argument('--instance-seed', type=int, default=0, help='graine du générateur')


def _generator_config(args):
    from solver.generator import GeneratorConfig

    return GeneratorConfig(n=args.n, metric=args.metric, demands=args.demands,
                           a=args.a, b=args.b, Q=args.Q, seed=args.instance_seed)


def resolve_instance(args) -> Instance:
    if getattr(args, 'instance', None):
        return load_instance(args.instance)
    from solver.generator import generate_instance

    return generate_instance(_generator_config(args))


def _params(args):
    from solver.policies import PolicyParams

    if args.lam is None and args.delta is None:
        return None
    return PolicyParams(lam=1.0 if args.lam is None else args.lam,
                        delta=0.0 if args.delta is None else args.delta)


def _tour(instance: Instance, provider: Optional[str]):
    from solver.tsp import get_tour

    return get_tour(instance, provider)


# ============================================
# COMMANDES
# ============================================

def cmd_run(args) -> int:
    """Exécute une politique sur une réalisation ; une ligne CSV de coûts, plus la trace."""
    from admin import reporting
    from shared.bounds import lower_bound
    from solver.mixtures import POLICY_NAMES, RANDOMIZED_POLICIES, run_policy
    from solver.oracle import monte_carlo
    from solver.tsp import tau_lower

    if args.policy not in POLICY_NAMES:
        raise ConfigError(f"politique inconnue: {args.policy!r}")
    instance = resolve_instance(args)
    if args.seed is None and (args.policy in RANDOMIZED_POLICIES or not instance.is_deterministic):
        raise ConfigError(f"--seed est obligatoire pour {args.policy} sur cette instance")

    tour = _tour(instance, args.tsp)
    params = _params(args)
    if args.trials > 1:
        if args.seed is None:
            raise ConfigError("--seed est obligatoire avec --trials")
        result = monte_carlo(args.policy, instance, args.trials, args.seed, params, tour)
        row = {'policy': args.policy, 'seed': args.seed, **result.to_dict()}
        with reporting.open_output(args.out) as out:
            reporting.write_csv(out, [row])
        return EXIT_OK

    streams = SeedStreams(args.seed) if args.seed is not None else None
    if instance.is_deterministic:
        realization = instance.fixed_realization()
    else:
        realization = instance.sample_realization(streams.generator(STREAM_DEMANDS))

    run = run_policy(args.policy, instance, realization, params, streams, tour)
    cost = cumulative_cost(run.itinerary, instance)
    lb = lower_bound(instance, realization, tau_lower(instance, tour))
    trace = run.trace
    if 'dispatched' in trace.notes:
        logger.info("politique retenue: %s (gamma=%.4g)", trace.notes['dispatched'], instance.gamma)

    row = reporting.cost_row(
        args.policy, cost,
        dispatched=trace.notes.get('dispatched', trace.policy), arm=trace.arm, seed=args.seed,
        tours=len(run.itinerary), additional_visits=trace.additional_visits,
        initial_load=trace.initial_load, lb=lb.lb,
        ratio=cost.total / lb.lb if lb.lb > 0 else math.nan,
    )
    with reporting.open_output(args.out) as out:
        reporting.write_csv(out, [row])
    if args.trace:
        reporting.write_trace(args.trace, trace.to_json_lines())
    if args.binary_trace:
        reporting.write_binary_archive(args.binary_trace, instance, trace.to_dict(), cost)
    return EXIT_OK


def _gamma_grid(args) -> List[float]:
    from solver.analysis import default_gamma_grid

    if args.gamma:
        return [float(g) for g in args.gamma]
    if args.step <= 0 or args.upper <= 0:
        raise ConfigError(f"grille invalide: pas {args.step}, borne {args.upper}")
    return default_gamma_grid(args.step, args.upper)


def cmd_ratio(args) -> int:
    from admin import reporting
    from solver.analysis import ratio_curves

    rows = ratio_curves(_gamma_grid(args), args.which, args.alpha, args.N)
    with reporting.open_output(args.out) as out:
        reporting.write_csv(out, rows, ['gamma', 'arm', 'theta', 'lambda', 'p', 'R1', 'Rinf', 'worst'])
    return EXIT_OK


def cmd_lpverify(args) -> int:
    """Les deux cas du PL discrétisé et leur maximum ; rapport JSON."""
    from admin import reporting
    from solver.certify import certify_lp, certify_sweep

    if args.sweep:
        table = certify_sweep([args.gamma], [float(s) for s in args.sweep], args.N, args.alpha,
                               args.backend)
        with reporting.open_output(args.out) as out:
            reporting.write_csv(out, table.to_rows())
        return EXIT_OK

    cases = [certify_lp(args.gamma, args.sigma, args.N, case, args.alpha, args.backend)
             for case in (1, 2)]
    values = [c.value for c in cases if c.value is not None]
    for c in cases:
        shown = 'irréalisable' if c.value is None else f"{c.value:.12g}"
        print(f"cas {c.case}: {shown} ({c.status.value}, {c.backend})")
    best = max(values) if values else None
    print(f"max: {best:.12g}" if best is not None else "max: aucun cas réalisable")

    report = {'gamma': args.gamma, 'sigma': args.sigma, 'N': args.N, 'alpha': args.alpha,
              'cases': [c.to_dict() for c in cases], 'max': best}
    if args.out:
        with reporting.open_output(args.out) as out:
            reporting.write_json(out, report)
    return EXIT_OK


ORACLE_POLICIES = ('dispatch', 'approx0', 'approx1', 'approx2', 'approx_s', 'alg1', 'alg2',
                   'alg_s', 'alg1_lambda0', 'partition_dp')
ORACLE_CUVRP_POLICIES = ('alg4', 'approx4', 'dispatch_cuvrp')


def cmd_oracle(args) -> int:
    """LB, OPT par énumération et espérance exacte de chaque politique (moyennes sur les demandes)."""
    from admin import reporting
    from shared.bounds import lower_bound
    from shared.itinerary import Mode
    from solver.oracle import brute_force_opt, expectation_over_demands, monte_carlo
    from solver.tsp import tau_lower

    if args.trials and args.seed is None:
        raise ConfigError("--seed est obligatoire avec --trials")
    instance = resolve_instance(args)
    tour = _tour(instance, args.tsp)
    tau = tau_lower(instance, tour)
    mode = Mode.SPLITTABLE if args.splittable else Mode.UNSPLITTABLE

    lb = opt = 0.0
    for prob, realization in instance.iter_realizations():
        lb += prob * lower_bound(instance, realization, tau).lb
        opt += prob * brute_force_opt(instance, realization, mode).value

    rows: List[Dict] = [{'policy': 'LB', 'expected_cost': lb, 'method': 'bound'},
                        {'policy': 'OPT', 'expected_cost': opt, 'method': mode.value}]
    names = ORACLE_POLICIES + (ORACLE_CUVRP_POLICIES if instance.is_deterministic else ())
    for name in names:
        try:
            value, method = expectation_over_demands(name, instance, tour=tour), 'exact'
        except ConfigError:
            if not args.trials:
                logger.info("%s: pas d'espérance exacte, ignorée (--trials pour Monte-Carlo)", name)
                continue
            value, method = monte_carlo(name, instance, args.trials, args.seed, tour=tour).mean, 'monte-carlo'
        except CuVRPError as exc:
            logger.info("%s: non applicable (%s)", name, exc)
            continue
        rows.append({'policy': name, 'expected_cost': value, 'method': method})

    for row in rows:
        row['ratio_lb'] = row['expected_cost'] / lb if lb > 0 else math.nan
        row['ratio_opt'] = row['expected_cost'] / opt if opt > 0 else math.nan
    with reporting.open_output(args.out) as out:
        reporting.write_csv(out, rows, ['policy', 'expected_cost', 'ratio_lb', 'ratio_opt', 'method'])
    return EXIT_OK


def cmd_gen(args) -> int:
    from solver.generator import generate_instance

    instance = generate_instance(_generator_config(args))
    if args.out in (None, '-'):
        from admin import reporting

        reporting.write_json(sys.stdout, instance.to_dict())
    else:
        save_instance(instance, args.out)
        logger.info("instance écrite: %s (%d clients)", args.out, instance.n)
    return EXIT_OK


def cmd_initdb(args) -> int:
    from admin.database import AdminDB

    print(f"Connexion à MongoDB: {args.uri}")
    db = AdminDB(args.uri)
    if args.reset:
        print("Suppression des réglages existants...")
        db.reset()
    inserted = db.init_default_data()
    print(f"Réglages insérés: {inserted}")
    print(f"Réglages en base: {db.settings.count_documents({})}")
    db.close()
    return EXIT_OK


# ============================================
# ANALYSE DES ARGUMENTS
# ============================================

def build_parser() -> argparse.ArgumentParser:
    from shared.constants import ALPHA_CHRISTOFIDES

    parser = argparse.ArgumentParser(prog='cuvrp', description='Laboratoire Cu-VRP / Cu-VRPSD')
    parser.add_argument('-v', '--verbose', action='store_true', help='journal DEBUG')
    parser.add_argument('-q', '--quiet', action='store_true', help='journal WARNING')
    parser.add_argument('--set', action='append', default=[], metavar='SECTION.KEY=VALUE',
                        help='surcharge de configuration (répétable)')
    parser.add_argument('--mongo', default=None, metavar='URI',
                        help='charger les réglages depuis MongoDB')
    sub = parser.add_subparsers(dest='command', required=True)

    run = sub.add_parser('run', help='exécuter une politique')
    run.add_argument('--instance', help='fichier JSON (sinon générateur)')
    _add_generator_args(run)
    run.add_argument('--policy', default='dispatch')
    run.add_argument('--lambda', dest='lam', type=float, default=None)
    run.add_argument('--delta', type=float, default=None)
    run.add_argument('--seed', type=int, default=None)
    run.add_argument('--trials', type=int, default=1)
    run.add_argument('--tsp', default=None, help='fournisseur de tournée')
    run.add_argument('--out', default='-')
    run.add_argument('--trace', default=None, help='trace en lignes JSON')
    run.add_argument('--binary-trace', default=None, help='archive msgpack')
    run.set_defaults(func=cmd_run)

    ratio = sub.add_parser('ratio', help='courbes de ratio')
    ratio.add_argument('--which', default='thetas', choices=['thetas', 'crossover', 'lp'])
    ratio.add_argument('--gamma', nargs='*', type=float, default=None)
    ratio.add_argument('--step', type=float, default=0.01)
    ratio.add_argument('--upper', type=float, default=2.0)
    ratio.add_argument('--alpha', type=float, default=ALPHA_CHRISTOFIDES)
    ratio.add_argument('--N', type=int, default=300)
    ratio.add_argument('--out', default='-')
    ratio.set_defaults(func=cmd_ratio)

    lp = sub.add_parser('lpverify', help='PL de certification d\'APPROX.2')
    lp.add_argument('gamma', type=float)
    lp.add_argument('sigma', type=float)
    lp.add_argument('N', type=int)
    lp.add_argument('--alpha', type=float, default=ALPHA_CHRISTOFIDES)
    lp.add_argument('--backend', default=None, choices=['auto', 'simplex', 'highs'])
    lp.add_argument('--sweep', nargs='*', default=None, metavar='SIGMA',
                    help='balayer ces valeurs de sigma (CSV)')
    lp.add_argument('--out', default=None)
    lp.set_defaults(func=cmd_lpverify)

    oracle = sub.add_parser('oracle', help='LB, OPT et espérances exactes')
    oracle.add_argument('--instance')
    _add_generator_args(oracle)
    oracle.add_argument('--splittable', action='store_true')
    oracle.add_argument('--trials', type=int, default=0)
    oracle.add_argument('--seed', type=int, default=None)
    oracle.add_argument('--tsp', default=None)
    oracle.add_argument('--out', default='-')
    oracle.set_defaults(func=cmd_oracle)

    gen = sub.add_parser('gen', help='générer une instance')
    _add_generator_args(gen)
    gen.add_argument('--out', default='-')
    gen.set_defaults(func=cmd_gen)

    initdb = sub.add_parser('initdb', help='semer les réglages dans MongoDB')
    initdb.add_argument('--uri', default='mongodb://localhost:27017')
    initdb.add_argument('--reset', action='store_true')
    initdb.set_defaults(func=cmd_initdb)
    return parser


def _overrides(pairs: List[str]) -> Dict[str, str]:
    out = {}
    for pair in pairs:
        key, sep, value = pair.partition('=')
        if not sep:
            raise ConfigError(f"--set attend SECTION.KEY=VALUE: {pair!r}")
        out[key.strip()] = value
    return out


def main(argv: Optional[List[str]] = None) -> int:
    from admin.config import get_config

    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    setup_logger(level)

    try:
        config = get_config()
        if args.mongo:
            config.load_from_mongodb(args.mongo)
        config.apply_overrides(_overrides(args.set))
        return args.func(args)
    except CuVRPError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return exc.exit_code


if __name__ == '__main__':
    sys.exit(main())
