"""JSON experiment configs: parsing, ``key=value`` overrides and validation.

Validation errors carry the offending field path and, when the config came
from a file, the line on which that field appears.
"""
import json
import re
from dataclasses import dataclass, field

from .agents import AGENT_KINDS, BLASTS, DISTORTIONS, SQUARED_REGRET, AgentConfig
from .bandit import KINDS as BANDIT_KINDS

EXPERIMENT_KINDS = ("bandit-regret", "bandit-rate", "rd-curve", "marginal-sweep", "mdp-regret")
MDP_AGENT_KINDS = ("PSRL", "VSRL")


class ConfigError(ValueError):
    def __init__(self, field, message, line=None):
        self.field = field
        self.line = line
        where = f"line {line}, " if line else ""
        super().__init__(f"{where}field '{field}': {message}")


@dataclass
class MdpAgentSpec:
    kind: str
    beta: float | None = None
    z_samples: int = 100
    ba_iters: int = 200
    ba_tol: float = 1e-9
    name: str = ""

    def __post_init__(self):
        if not self.name:
            self.name = self.kind if self.kind == "PSRL" else f"VSRL(beta={self.beta:g})"


@dataclass
class ExperimentConfig:
    kind: str
    env: dict
    agents: list = field(default_factory=list)
    horizon: int = 2000
    seeds: list = field(default_factory=lambda: list(range(30)))
    out: str = "results"
    rate_samples: int = 0
    n_jobs: int = 1
    # rd-curve
    betas: list = field(default_factory=list)
    epsilons: list = field(default_factory=list)
    z_samples: int = 1000
    distortion_kind: str = SQUARED_REGRET
    ba_iters: int = 200
    ba_tol: float = 1e-9
    # marginal-sweep
    lambdas: list = field(default_factory=list)
    variants: list = field(default_factory=list)
    ts_samples: int = 100_000
    notes: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict, repr=False)


def _line_of(text, key):
    if not text:
        return None
    pat = re.compile(r'"' + re.escape(key) + r'"\s*:')
    for i, line in enumerate(text.splitlines(), 1):
        if pat.search(line):
            return i
    return None


def parse_value(text):
    """Interpret an override value as JSON when possible, else as a plain string."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(doc, overrides):
    """Apply dotted ``key=value`` overrides in order; list indices are integers."""
    for item in overrides:
        if "=" not in item:
            raise ConfigError(item, "override must look like key=value")
        key, value = item.split("=", 1)
        parts = key.strip().split(".")
        node = doc
        try:
            for p in parts[:-1]:
                node = node[int(p)] if isinstance(node, list) else node.setdefault(p, {})
            last = parts[-1]
            if isinstance(node, list):
                node[int(last)] = parse_value(value)
            elif isinstance(node, dict):
                node[last] = parse_value(value)
            else:
                raise TypeError(f"cannot index into {type(node).__name__}")
        except (IndexError, ValueError, TypeError) as exc:
            raise ConfigError(key, f"override path does not exist ({exc})") from exc
    return doc


def load_config(path, overrides=(), n_seeds=None):
    """Read, override and validate a config file; returns ``ExperimentConfig``."""
    with open(path) as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<document>", f"invalid JSON: {exc.msg}", exc.lineno) from exc
    if not isinstance(doc, dict):
        raise ConfigError("<document>", "top level must be an object", 1)
    apply_overrides(doc, overrides)
    if n_seeds is not None:
        doc["seeds"] = list(range(int(n_seeds)))
    try:
        return validate(doc, text)
    except (TypeError, KeyError, AttributeError) as exc:
        # Wrongly typed nested values (e.g. a string where a list of numbers belongs).
        raise ConfigError("<document>", f"malformed value: {exc}") from exc


def _require(cond, fld, msg, text):
    if not cond:
        raise ConfigError(fld, msg, _line_of(text, fld.split(".")[-1].split("[")[0]))


def _number(doc, key, text, lo=None, integer=False, default=None):
    val = doc.get(key, default)
    ok = isinstance(val, (int, float)) and not isinstance(val, bool)
    if integer:
        ok = ok and float(val).is_integer()
    _require(ok, key, "must be an integer" if integer else "must be a number", text)
    if lo is not None:
        _require(val >= lo, key, f"must be >= {lo}", text)
    return int(val) if integer else float(val)


def _bandit_agent(i, spec, text):
    fld = f"agents[{i}]"
    _require(isinstance(spec, dict), fld, "agent entry must be an object", text)
    kind = spec.get("kind")
    _require(kind in AGENT_KINDS, f"{fld}.kind", f"must be one of {list(AGENT_KINDS)}", text)
    kw = {
        "z_samples": int(spec.get("z_samples", 1000)),
        "ba_iters": int(spec.get("ba_iters", 200)),
        "ba_tol": float(spec.get("ba_tol", 1e-9)),
        "distortion_kind": spec.get("distortion_kind", SQUARED_REGRET),
        "name": spec.get("name", ""),
    }
    _require(kw["distortion_kind"] in DISTORTIONS, f"{fld}.distortion_kind",
             f"must be one of {list(DISTORTIONS)}", text)
    _require(kw["z_samples"] >= 1, f"{fld}.z_samples", "must be >= 1", text)
    if kind == BLASTS:
        has_beta, has_lam = "beta" in spec, "lambda" in spec
        _require(has_beta != has_lam, f"{fld}.beta", "BLASTS needs exactly one of beta or lambda", text)
        key = "beta" if has_beta else "lambda"
        val = spec[key]
        _require(isinstance(val, (int, float)) and val >= 0, f"{fld}.{key}", "must be a number >= 0", text)
        return AgentConfig.blasts(**{("beta" if has_beta else "lam"): float(val)}, **kw)
    if kind == "STS":
        eps = spec.get("epsilon")
        _require(isinstance(eps, (int, float)) and eps >= 0, f"{fld}.epsilon", "STS needs epsilon >= 0", text)
        return AgentConfig(kind, epsilon=float(eps), **kw)
    return AgentConfig(kind, **kw)


def _mdp_agent(i, spec, text):
    fld = f"agents[{i}]"
    _require(isinstance(spec, dict), fld, "agent entry must be an object", text)
    kind = spec.get("kind")
    _require(kind in MDP_AGENT_KINDS, f"{fld}.kind", f"must be one of {list(MDP_AGENT_KINDS)}", text)
    if kind == "VSRL":
        beta = spec.get("beta")
        _require(isinstance(beta, (int, float)) and beta >= 0, f"{fld}.beta", "VSRL needs beta >= 0", text)
        return MdpAgentSpec(kind, float(beta), int(spec.get("z_samples", 100)),
                            int(spec.get("ba_iters", 200)), float(spec.get("ba_tol", 1e-9)),
                            spec.get("name", ""))
    return MdpAgentSpec(kind, name=spec.get("name", ""))


def validate(doc, text=""):
    kind = doc.get("kind")
    _require(kind in EXPERIMENT_KINDS, "kind", f"must be one of {list(EXPERIMENT_KINDS)}", text)
    env = doc.get("env", {})
    _require(isinstance(env, dict), "env", "must be an object", text)
    seeds = doc.get("seeds", list(range(30)))
    _require(isinstance(seeds, list) and len(seeds) >= 1, "seeds", "must be a non-empty list", text)
    _require(all(isinstance(s, int) and 0 <= s < 2**64 for s in seeds), "seeds",
             "entries must be 64-bit non-negative integers", text)
    cfg = ExperimentConfig(kind=kind, env=env, seeds=list(seeds), raw=doc,
                           out=str(doc.get("out", "results")), notes=doc.get("notes", {}))
    cfg.n_jobs = _number(doc, "n_jobs", text, lo=1, integer=True, default=1)

    if kind in ("bandit-regret", "bandit-rate", "rd-curve"):
        _require(env.get("kind") in BANDIT_KINDS, "env.kind", f"must be one of {list(BANDIT_KINDS)}", text)
        _require(isinstance(env.get("n_arms"), int) and env["n_arms"] >= 1, "env.n_arms",
                 "must be an integer >= 1", text)
    if kind in ("bandit-regret", "bandit-rate"):
        agents = doc.get("agents")
        _require(isinstance(agents, list) and agents, "agents", "must be a non-empty list", text)
        cfg.agents = [_bandit_agent(i, a, text) for i, a in enumerate(agents)]
        cfg.horizon = _number(doc, "horizon", text, lo=1, integer=True, default=2000)
        cfg.rate_samples = _number(doc, "rate_samples", text, lo=0, integer=True,
                                   default=1000 if kind == "bandit-rate" else 0)
        if "fixed_means" in env:
            fm = env["fixed_means"]
            _require(isinstance(fm, list) and len(fm) == env["n_arms"], "env.fixed_means",
                     "must list one mean per arm", text)
    elif kind == "mdp-regret":
        for key in ("n_states", "n_actions", "horizon"):
            _require(isinstance(env.get(key), int) and env[key] >= 1, f"env.{key}",
                     "must be an integer >= 1", text)
        agents = doc.get("agents")
        _require(isinstance(agents, list) and agents, "agents", "must be a non-empty list", text)
        cfg.agents = [_mdp_agent(i, a, text) for i, a in enumerate(agents)]
        cfg.horizon = _number(doc, "episodes", text, lo=1, integer=True, default=500)
    elif kind == "rd-curve":
        betas = doc.get("betas")
        _require(isinstance(betas, list) and betas and all(b >= 0 for b in betas), "betas",
                 "must be a non-empty list of non-negative numbers", text)
        _require(betas == sorted(betas), "betas", "must be ascending", text)
        cfg.betas = [float(b) for b in betas]
        eps = doc.get("epsilons", [])
        _require(isinstance(eps, list) and all(e >= 0 for e in eps), "epsilons",
                 "must be a list of non-negative numbers", text)
        cfg.epsilons = [float(e) for e in eps]
        cfg.z_samples = _number(doc, "z_samples", text, lo=1, integer=True, default=1000)
        cfg.distortion_kind = doc.get("distortion_kind", SQUARED_REGRET)
        _require(cfg.distortion_kind in DISTORTIONS, "distortion_kind", f"must be one of {list(DISTORTIONS)}", text)
    elif kind == "marginal-sweep":
        variants = doc.get("variants")
        _require(isinstance(variants, list) and variants, "variants", "must be a non-empty list", text)
        for i, v in enumerate(variants):
            _require(isinstance(v, dict) and "mu" in v and "sigma" in v, f"variants[{i}]",
                     "needs mu and sigma lists", text)
            _require(len(v["mu"]) == len(v["sigma"]) and all(s > 0 for s in v["sigma"]),
                     f"variants[{i}].sigma", "must match mu in length and be positive", text)
        cfg.variants = variants
        lambdas = doc.get("lambdas")
        _require(isinstance(lambdas, list) and lambdas and all(x >= 0 for x in lambdas), "lambdas",
                 "must be a non-empty list of non-negative numbers", text)
        cfg.lambdas = [float(x) for x in lambdas]
        cfg.z_samples = _number(doc, "z_samples", text, lo=1, integer=True, default=50_000)
        cfg.ts_samples = _number(doc, "ts_samples", text, lo=1, integer=True, default=100_000)
        cfg.distortion_kind = doc.get("distortion_kind", "linear-regret")
        _require(cfg.distortion_kind in DISTORTIONS, "distortion_kind", f"must be one of {list(DISTORTIONS)}", text)
    cfg.ba_iters = _number(doc, "ba_iters", text, lo=1, integer=True, default=200)
    cfg.ba_tol = _number(doc, "ba_tol", text, lo=0, default=1e-9)
    return cfg
