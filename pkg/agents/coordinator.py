"""
Request router shared by the CLI and the HTTP backend

A request is a plain dict with a "command" (simulate | train | explain) and
optional fields mirroring the CLI flags. Results come back as dicts:
{"success": True, ...} or {"error": message, "error_kind": kind}.
"""
import logging
from pathlib import Path
from typing import Any, Callable, Dict, Optional

from agents.band_agent import BandAgent
from agents.base_agent import BaseAgent
from agents.manifest import RunManifest
from agents.policy_agent import PolicyAgent
from agents.random_agent import RandomAgent
from agents.simulation import simulate
from environment.demand import DemandPattern, DemandProfile, read_demand_csv
from environment.scenarios import Scenario, resolve_scenario, with_overrides
from errors import AirForgeError, ConfigurationError
from explain.attribution import (
    TimeScenario,
    case_attribution,
    compare_rankings,
    global_attribution,
    labels_for,
    pattern_attribution,
    time_resolved_attribution,
)
from explain.perturbation import SweepSpec, perturbation_sweep, sweep_monotonicity
from explain.reports import attribution_frame, attribution_records, to_jsonable, write_csv, write_json
from explain.saliency import saliency_profile
from explain.sampling import ObservationSampler
from policy.params import PolicyParams, load_params
from ppo.trainer import train
from settings import Settings, get_settings

logger = logging.getLogger("Coordinator")

CONTROLLERS = ("baseline", "policy", "random")
EXPLAIN_KINDS = ("perturb", "saliency", "shap-global", "shap-pattern", "shap-case", "shap-time")
SYNTHETIC_PREFIX = "synthetic:"


class CoordinatorAgent(BaseAgent):
    """Resolves the scenario, runs one command and writes its outputs plus a manifest"""

    def __init__(self, settings: Optional[Settings] = None):
        super().__init__("CoordinatorAgent", 0)
        self.settings = settings or get_settings()
        self.handlers: Dict[str, Callable[[Dict[str, Any], Scenario, RunManifest, Path], Dict[str, Any]]] = {
            "simulate": self._handle_simulate,
            "train": self._handle_train,
            "explain": self._handle_explain,
        }

    def process_request(self, request: Dict[str, Any]) -> Dict[str, Any]:
        """Run a request and report the outcome as a dict"""
        command = request.get("command")
        logger.info(f"Processing: {command} {request.get('kind') or ''}".rstrip())
        try:
            handler = self.handlers.get(command)
            if handler is None:
                raise ConfigurationError(f"unknown command '{command}', expected one of {sorted(self.handlers)}")
            scenario = self._scenario(request)
            seed = self._seed(request)
            out_dir = self._out_dir(request, command, scenario, seed)
            manifest = RunManifest(
                command=command,
                scenario=scenario.name,
                config_hash=scenario.config_hash(),
                seed=seed,
                parameters={k: v for k, v in request.items() if v is not None and k != "command"},
            )
            result = handler(request, scenario, manifest, out_dir)
            manifest.write(out_dir)
            logger.info(f"✅ {command} finished, outputs in {out_dir}")
            return {"success": True, "command": command, "scenario": scenario.name,
                    "out_dir": str(out_dir), "artifacts": list(manifest.artifacts), **to_jsonable(result)}
        except AirForgeError as e:
            logger.error(f"❌ {e}")
            return {"error": str(e), "error_kind": e.kind}
        except Exception as e:
            logger.exception(f"❌ {command} failed")
            return {"error": str(e), "error_kind": "runtime"}

    def _seed(self, request: Dict[str, Any]) -> int:
        seed = request.get("seed")
        return self.settings.seed if seed is None else int(seed)

    def _scenario(self, request: Dict[str, Any]) -> Scenario:
        scenario = resolve_scenario(request.get("scenario"), request.get("config"))
        sections: Dict[str, Any] = {}
        train_overrides = dict(request.get("train") or {})
        if request.get("iterations") is not None:
            train_overrides["max_iterations"] = int(request["iterations"])
        if request.get("workers") is not None:
            train_overrides["rollout_workers"] = int(request["workers"])
        if train_overrides:
            sections["train"] = train_overrides
        if request.get("explain"):
            sections["explain"] = dict(request["explain"])
        return with_overrides(scenario, **sections) if sections else scenario

    def _out_dir(self, request: Dict[str, Any], command: str, scenario: Scenario, seed: int) -> Path:
        out = request.get("out")
        if out:
            path = Path(out)
        else:
            suffix = f"-{request['kind']}" if command == "explain" and request.get("kind") else ""
            path = Path(self.settings.out_dir) / f"{command}{suffix}-{scenario.name}-seed{seed}"
        path.mkdir(parents=True, exist_ok=True)
        return path

    def _demand(self, request: Dict[str, Any], scenario: Scenario, seed: int) -> DemandProfile:
        """Scenario demand, `synthetic:PATTERN` (seeded by the request) or a CSV path"""
        source = request.get("demand")
        if not source:
            return scenario.build_demand()
        if source.startswith(SYNTHETIC_PREFIX):
            pattern = DemandPattern.parse(source[len(SYNTHETIC_PREFIX):])
            return with_overrides(scenario, demand={"pattern": pattern.value, "csv": None}).build_demand(seed=seed)
        return read_demand_csv(source, dt=scenario.system.dt, ceiling=scenario.demand_ceiling)

    def _policy(self, request: Dict[str, Any], scenario: Scenario) -> PolicyParams:
        path = request.get("policy")
        if not path:
            raise ConfigurationError("a policy file is required (--policy)")
        return load_params(path, expected_hash=scenario.environment_hash())

    def _handle_simulate(self, request, scenario, manifest, out_dir) -> Dict[str, Any]:
        controller = request.get("controller") or "baseline"
        seed = manifest.seed
        if controller not in CONTROLLERS:
            raise ConfigurationError(f"unknown controller '{controller}', expected one of {CONTROLLERS}")
        if controller == "policy":
            agent = PolicyAgent(self._policy(request, scenario), source=str(request["policy"]))
        elif controller == "random":
            agent = RandomAgent(scenario.act_dim, seed=seed)
        else:
            agent = BandAgent(scenario.band, scenario.system.compressors, scenario.demand_ceiling)

        profile = self._demand(request, scenario, seed)
        steps = request.get("steps")
        result = simulate(agent, scenario, profile, start=int(request.get("start") or 0),
                          steps=int(steps) if steps else None)
        manifest.add(write_csv(result.trajectory, out_dir / "trajectory.csv"), out_dir)
        manifest.add(write_json(result.summary, out_dir / "summary.json"), out_dir)
        return {"summary": result.summary}

    def _handle_train(self, request, scenario, manifest, out_dir) -> Dict[str, Any]:
        result = train(scenario, scenario.train, seed=manifest.seed, out_dir=out_dir)
        for path in result.checkpoints.values():
            manifest.add(path, out_dir)
        if (out_dir / "learning_curve.csv").exists():
            manifest.add(out_dir / "learning_curve.csv", out_dir)
        curve = result.curve
        return {
            "summary": {
                "iterations": int(len(curve)),
                "final_mean_reward": float(curve["mean_reward"].iloc[-1]) if len(curve) else None,
                "best_mean_reward": result.best_reward if len(curve) else None,
                "stopped_early": result.stopped_early,
            }
        }

    def _handle_explain(self, request, scenario, manifest, out_dir) -> Dict[str, Any]:
        kind = request.get("kind")
        if kind not in EXPLAIN_KINDS:
            raise ConfigurationError(f"unknown explain kind '{kind}', expected one of {EXPLAIN_KINDS}")
        config = scenario.explain
        template = config.levels_template
        if template is not None and len(template) != scenario.system.n_compressors:
            raise ConfigurationError(
                f"levels_template has {len(template)} entries but {scenario.name} has "
                f"{scenario.system.n_compressors} compressors"
            )
        params = self._policy(request, scenario)
        labels = labels_for(scenario)
        sampler = ObservationSampler(scenario)
        summary: Dict[str, Any] = {"kind": kind}

        if kind == "perturb":
            frame = perturbation_sweep(params, SweepSpec.for_scenario(scenario, config))
            manifest.add(write_csv(frame, out_dir / "perturbation_sweep.csv"), out_dir)
            summary["rows"] = len(frame)
            monotonicity = sweep_monotonicity(frame)
            manifest.add(write_json({"spearman_flow_vs_setpoint": monotonicity},
                                    out_dir / "perturbation_correlations.json"), out_dir)
            summary["spearman_flow_vs_setpoint"] = monotonicity
            for pressure, rho in monotonicity.items():
                logger.info(f"📈 sweep at {pressure} bar: Spearman {rho:.3f}")

        elif kind == "saliency":
            profile = saliency_profile(params, config, sampler, labels)
            manifest.add(write_csv(profile.to_frame(), out_dir / "saliency.csv"), out_dir)
            summary.update({"n_samples": profile.n_samples, "n_discarded": profile.n_discarded,
                            "saliency": dict(zip(labels, profile.importance.tolist()))})

        elif kind in ("shap-global", "shap-pattern"):
            attribution = global_attribution(params, scenario, config)
            manifest.add(write_csv(attribution.to_frame(), out_dir / "shap_global.csv"), out_dir)
            manifest.add(write_csv(attribution_frame(attribution.results), out_dir / "shap_states.csv"), out_dir)
            manifest.add(write_json(attribution_records(attribution.results), out_dir / "shap_states.json"), out_dir)
            summary["mean_abs_phi"] = dict(zip(labels, attribution.mean_abs_phi.tolist()))
            if kind == "shap-global":
                profile = saliency_profile(params, config, sampler, labels)
                comparison = compare_rankings(attribution.mean_abs_phi, profile.importance, labels)
                manifest.add(write_csv(comparison.frame, out_dir / "shap_vs_saliency.csv"), out_dir)
                summary["spearman_shap_vs_saliency"] = comparison.spearman
            else:
                pattern = pattern_attribution(params, scenario, config, results=attribution.results)
                manifest.add(write_csv(pattern.frame, out_dir / "shap_pattern.csv"), out_dir)
                manifest.add(write_json(pattern.correlations, out_dir / "shap_pattern_correlations.json"), out_dir)
                manifest.add(write_json({**attribution_records(attribution.results), "pearson": pattern.correlations},
                                        out_dir / "shap_pattern.json"), out_dir)
                summary["pearson"] = pattern.correlations

        elif kind == "shap-case":
            results = case_attribution(params, scenario, config)
            records = [{**r.to_dict(), "waterfall": r.waterfall()} for r in results]
            manifest.add(write_json({"records": records}, out_dir / "shap_case.json"), out_dir)
            summary["cases"] = [r.extra["case"] for r in results]

        else:
            time_kind = TimeScenario.parse(request.get("time_scenario") or TimeScenario.DEMAND_SWEEP_CONST_P.value)
            length = request.get("length")
            frame = time_resolved_attribution(params, scenario, time_kind,
                                              int(length) if length else None, config)
            manifest.add(write_csv(frame, out_dir / f"shap_time_{time_kind.value}.csv"), out_dir)
            summary.update({"time_scenario": time_kind.value, "steps": len(frame)})

        return {"summary": summary}
