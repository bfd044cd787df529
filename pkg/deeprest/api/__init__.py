# API routes
from fastapi import APIRouter
from deeprest.api.denoise import router as denoise_router
from deeprest.api.metrics import router as metrics_router
from deeprest.api.models import router as models_router

# Combine all routers
router = APIRouter()
router.include_router(denoise_router)
router.include_router(metrics_router)
router.include_router(models_router)

__all__ = ["router"]
