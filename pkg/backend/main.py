import logging
from typing import Any, Dict, List, Optional

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from agents.coordinator import CONTROLLERS, EXPLAIN_KINDS, CoordinatorAgent
from environment.scenarios import PRESETS, get_preset
from settings import __version__

logger = logging.getLogger("Backend")

app = FastAPI(title="AirForge Compressed-Air Control API", version=__version__)

# CORS middleware - allow all origins for local tooling
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=False,
    allow_methods=["*"],
    allow_headers=["*"],
)

coordinator = CoordinatorAgent()


class RunRequest(BaseModel):
    scenario: Optional[str] = None
    config: Optional[str] = None
    seed: Optional[int] = None
    out: Optional[str] = None
    policy: Optional[str] = None


class SimulateRequest(RunRequest):
    controller: str = "baseline"
    demand: Optional[str] = None
    steps: Optional[int] = Field(default=None, gt=0)
    start: Optional[int] = Field(default=None, ge=0)


class ExplainRequest(RunRequest):
    kind: str
    time_scenario: Optional[str] = None
    length: Optional[int] = Field(default=None, gt=0)
    explain: Optional[Dict[str, Any]] = None


class RunResponse(BaseModel):
    success: bool
    command: str
    scenario: str
    out_dir: str
    artifacts: List[str]
    summary: Dict[str, Any]


def _run(command: str, request: RunRequest) -> RunResponse:
    response = coordinator.process_request({"command": command, **request.model_dump(exclude_none=True)})
    if "error" in response:
        status = 422 if response.get("error_kind") == "configuration" else 500
        raise HTTPException(status_code=status, detail=response["error"])
    return RunResponse(**response)


@app.get("/")
async def root():
    return {"message": "AirForge Compressed-Air Control API", "status": "running", "version": __version__}


@app.get("/status")
async def get_status():
    """Capabilities of this service"""
    return {
        "version": __version__,
        "controllers": list(CONTROLLERS),
        "explain_kinds": list(EXPLAIN_KINDS),
        "out_dir": coordinator.settings.out_dir,
    }


@app.get("/scenarios")
async def list_scenarios():
    """Built-in presets with their observation/action sizes"""
    scenarios = []
    for name in PRESETS:
        scenario = get_preset(name)
        scenarios.append({
            "name": name,
            "compressors": scenario.system.n_compressors,
            "horizon": scenario.horizon,
            "obs_dim": scenario.obs_dim,
            "act_dim": scenario.act_dim,
            "environment_hash": scenario.environment_hash(),
        })
    return {"scenarios": scenarios}


@app.post("/simulate", response_model=RunResponse)
def run_simulation(request: SimulateRequest):
    """Simulate a controller and return the run summary"""
    return _run("simulate", request)


@app.post("/explain", response_model=RunResponse)
def run_explain(request: ExplainRequest):
    """Run one explainability analysis on a policy file"""
    return _run("explain", request)


if __name__ == "__main__":
    import uvicorn

    from settings import setup_logging

    setup_logging()
    uvicorn.run(app, host="0.0.0.0", port=8000)
