"""
Request timing and logging middleware
"""
import time

from fastapi import Request
from starlette.middleware.base import BaseHTTPMiddleware

from deeprest.core.logging import get_logger

logger = get_logger("api")


class TimingMiddleware(BaseHTTPMiddleware):
    """
    Log method, path, status and duration of every request
    """
    async def dispatch(self, request: Request, call_next):
        start_time = time.perf_counter()
        response = await call_next(request)
        duration_ms = (time.perf_counter() - start_time) * 1000
        logger.info(
            f"[TIMING] {request.method} {request.url.path} | duration={duration_ms:.2f}ms "
            f"| status={response.status_code}"
        )
        return response
