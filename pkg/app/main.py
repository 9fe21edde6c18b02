from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
import logging
from app.core.config import settings
from app.api import buildings, simulations

# Configure logging
logging.basicConfig(level=settings.LOG_LEVEL)
logger = logging.getLogger(__name__)


app = FastAPI(
    title=settings.PROJECT_NAME,
    version=settings.VERSION,
    description="Multizone building thermal, airflow and moisture simulation with selectable models"
)

# CORS middleware
app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.CORS_ORIGINS,
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(
    buildings.router,
    prefix=f"{settings.API_V1_PREFIX}/buildings",
    tags=["buildings"]
)

# Synthetic weather, runs and case comparisons
app.include_router(
    simulations.router,
    prefix=settings.API_V1_PREFIX,
    tags=["simulations"]
)


@app.get("/")
async def root():
    return {
        "name": settings.PROJECT_NAME,
        "version": settings.VERSION,
        "docs": "/docs",
        "features": [
            "Isotropic and anisotropic sky diffuse reconstruction",
            "Per-zone indoor convection models (constant, per-surface, nonlinear)",
            "Prescribed flow rates or pressure-node airflow network",
            "Ideal HVAC control with equipment sizing mode",
            "Zone humidity balance",
        ]
    }


@app.get("/health")
async def health_check():
    return {"status": "healthy"}


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host="0.0.0.0", port=8000)
