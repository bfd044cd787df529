"""
FastAPI app

- Denoising, PSNR and model endpoints under /api/v1
- CORS origins from Settings.cors_origins
- Basic health check
"""
from pathlib import Path

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

# Load environment variables from .env file early
try:
    from dotenv import load_dotenv
    project_root = Path(__file__).parent.parent
    load_dotenv(dotenv_path=project_root / ".env")
except ImportError:
    pass

from deeprest import __version__
from deeprest.api import router
from deeprest.api.middleware import TimingMiddleware
from deeprest.core.config import get_settings
from deeprest.core.logging import configure_logging

settings = get_settings()
configure_logging(settings.log_level)

app = FastAPI(title="deeprest", version=__version__)

app.add_middleware(TimingMiddleware)

app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.cors_origin_list,
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(router, prefix="/api/v1")


@app.get("/")
async def root():
    """
    Basic health check
    """
    return {"status": "ok", "version": __version__}
