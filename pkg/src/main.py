import json
import time
from contextlib import asynccontextmanager
from datetime import datetime, timezone

import structlog
from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from prometheus_client import (
    CONTENT_TYPE_LATEST,
    Counter,
    Histogram,
    generate_latest,
)

from src.config import settings
from src.exceptions import UltrametricError
from src.logging_config import configure_logging
from src.models import (
    CheckRequest,
    CheckResponse,
    EmbedResponse,
    EmbeddingLine,
    ErrorResponse,
    HealthCheckResponse,
    NerveFile,
    ProductRequest,
    SpaceFile,
    SpaceInfoResponse,
    ValidateResponse,
)
from src.services.analysis_service import analysis_service
from src.services.generator_service import generator_service
from src.ultrametric.core import spectrum
from src.ultrametric.funcspace import DegreeFunction, embed_space, parse_degree_spec
from src.ultrametric.nerve import build_nerve
from src.ultrametric.twostruct import decomposition_tree, from_space
from src.utils.rational import format_rational, parse_rational
from src.utils.space_io import space_from_model, space_to_model, tree_to_model

logger = structlog.get_logger(__name__)

# Prometheus metrics
REQUEST_COUNT = Counter(
    "http_requests_total",
    "Total HTTP requests",
    ["method", "endpoint", "status"],
)
REQUEST_LATENCY = Histogram(
    "http_request_duration_seconds", "HTTP request latency"
)
VERDICT_COUNT = Counter(
    "space_verdicts_total",
    "Verdicts computed",
    ["check", "result"],
)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Application lifespan manager."""
    configure_logging()
    logger.info("Starting Ultrametric Toolkit service", version=settings.APP_VERSION)
    yield
    logger.info("Shutting down Ultrametric Toolkit service")


app = FastAPI(
    title=settings.APP_NAME,
    version=settings.APP_VERSION,
    description="Finite ultrametric spaces: nerves, isometries, embeddings and decompositions",
    docs_url="/api/docs" if settings.DEBUG else None,
    redoc_url="/api/redoc" if settings.DEBUG else None,
    lifespan=lifespan,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_methods=["*"],
    allow_headers=["*"],
)


@app.middleware("http")
async def track_requests(request: Request, call_next):
    """Track request metrics."""
    start_time = time.time()

    response = await call_next(request)

    duration = time.time() - start_time
    REQUEST_LATENCY.observe(duration)
    REQUEST_COUNT.labels(
        method=request.method,
        endpoint=request.url.path,
        status=response.status_code,
    ).inc()

    return response


@app.get("/health", response_model=HealthCheckResponse)
async def health_check():
    """Health check endpoint."""
    return HealthCheckResponse(
        status="healthy",
        timestamp=datetime.now(timezone.utc),
        version=settings.APP_VERSION,
    )


@app.get("/metrics")
async def metrics():
    """Prometheus metrics endpoint."""
    if not settings.ENABLE_METRICS:
        raise HTTPException(status_code=404, detail="Metrics disabled")

    return Response(content=generate_latest(), media_type=CONTENT_TYPE_LATEST)


@app.post("/api/spaces/validate", response_model=ValidateResponse)
def validate_space(body: SpaceFile):
    space = space_from_model(body)
    return ValidateResponse(
        valid=True,
        points=len(space),
        spectrum=[format_rational(r) for r in sorted(spectrum(space))],
    )


@app.post("/api/spaces/info", response_model=SpaceInfoResponse)
def space_info(body: SpaceFile):
    return analysis_service.info(space_from_model(body))


@app.post("/api/spaces/nerve", response_model=NerveFile)
def space_nerve(body: SpaceFile):
    space = space_from_model(body)
    nerve = build_nerve(space)
    return tree_to_model(
        space,
        [node.members for node in nerve.nodes],
        lambda members: nerve.node(members).diameter,
        nerve.parent,
    )


@app.post("/api/spaces/check", response_model=CheckResponse)
def check_space(body: CheckRequest):
    space = space_from_model(body.space)
    verdicts = analysis_service.check(space, body.flags, brute_force=body.brute_force)
    for name, value in verdicts.items():
        VERDICT_COUNT.labels(check=name, result=str(value).lower()).inc()
    return CheckResponse(verdicts=verdicts)


@app.post("/api/spaces/embed", response_model=EmbedResponse)
def embed(body: SpaceFile):
    space = space_from_model(body)
    result = embed_space(space)
    return EmbedResponse(
        degree_function={format_rational(r): k for r, k in result.df.entries},
        embedding=[
            EmbeddingLine(point=p, image={format_rational(r): k for r, k in result.psi[p].assignment})
            for p in space.points
        ],
    )


@app.post("/api/spaces/decompose", response_model=NerveFile)
def decompose(body: SpaceFile):
    space = space_from_model(body)
    tree = decomposition_tree(from_space(space))
    return tree_to_model(space, tree.nodes, tree.node_label.get, tree.parent)


@app.get("/api/generate/cantor/{depth}", response_model=SpaceFile)
def generate_cantor(depth: int):
    return space_to_model(generator_service.gen_cantor(depth))


@app.post("/api/generate/product", response_model=SpaceFile)
def generate_product(body: ProductRequest):
    if isinstance(body.spectrum, str):
        df = parse_degree_spec(body.spectrum)
    else:
        df = DegreeFunction.from_mapping({parse_rational(r): k for r, k in body.spectrum.items()})
    return space_to_model(generator_service.gen_product(df))


@app.exception_handler(UltrametricError)
async def ultrametric_exception_handler(request: Request, exc: UltrametricError):
    """Library errors are client errors."""
    logger.warning("Request rejected", path=request.url.path, error=exc.message)
    error_response = ErrorResponse(
        error=type(exc).__name__,
        detail=exc.message,
        timestamp=datetime.now(timezone.utc),
        request_id=request.headers.get("X-Request-ID"),
    )
    return JSONResponse(status_code=400, content=json.loads(error_response.model_dump_json()))


@app.exception_handler(HTTPException)
async def http_exception_handler(request: Request, exc: HTTPException):
    error_response = ErrorResponse(
        error="Resource not found" if exc.status_code == 404 else str(exc.detail),
        detail=str(exc.detail),
        timestamp=datetime.now(timezone.utc),
        request_id=request.headers.get("X-Request-ID"),
    )
    return JSONResponse(status_code=exc.status_code, content=json.loads(error_response.model_dump_json()))


@app.get("/")
async def root():
    """Root endpoint."""
    return {
        "service": settings.APP_NAME,
        "version": settings.APP_VERSION,
        "docs_url": "/api/docs" if settings.DEBUG else None,
    }


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(
        "src.main:app",
        host=settings.HOST,
        port=settings.PORT,
        reload=settings.DEBUG,
        log_level=settings.LOG_LEVEL.lower(),
    )
