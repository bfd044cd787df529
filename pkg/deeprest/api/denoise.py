"""
Denoising endpoint
"""
from typing import Optional

from fastapi import APIRouter, File, Form, UploadFile
from starlette.concurrency import run_in_threadpool

from deeprest.api.utils import http_errors, json_db, parse_float_list, pgm_base64, read_upload_image
from deeprest.database.schemas import DenoiseConfig
from deeprest.services.denoiser import add_gaussian_noise, denoise_multipass

router = APIRouter()


@router.post("/denoise")
async def denoise_image(
    image: UploadFile = File(..., description="Grayscale PGM or PNG"),
    sigma: float = Form(..., description="Noise standard deviation"),
    layers: int = Form(3),
    passes: int = Form(1),
    pass_sigmas: Optional[str] = Form(None, description="Comma-separated per-pass sigmas"),
    iters: int = Form(100),
    patch: int = Form(9),
    seed: int = Form(0),
    simulate: bool = Form(False, description="Treat the upload as clean and add noise first"),
):
    """
    Denoise an image by learning a model on it

    With simulate=true the upload is the clean reference: noise is added with
    `seed`, and input/output PSNR are reported. Otherwise the upload is taken
    as already noisy at level `sigma`.

    Returns the report plus base64 P5 images (clamped to [0, 255]).
    """
    img = await read_upload_image(image)
    with http_errors():
        cfg = DenoiseConfig(
            sigma=sigma,
            layers=layers,
            patch=patch,
            iters=iters,
            passes=passes,
            pass_sigmas=parse_float_list(pass_sigmas),
            seed=seed,
        )
        clean = img if simulate else None
        noisy = add_gaussian_noise(img, cfg.sigma, cfg.seed) if simulate else img
        denoised, report = await run_in_threadpool(denoise_multipass, noisy, cfg, clean)

    payload = report.model_dump()
    payload["input_psnr"] = json_db(report.input_psnr)
    for entry, result in zip(payload["passes"], report.passes):
        entry["psnr"] = json_db(result.psnr)
    return {
        "report": payload,
        "config": cfg.model_dump(),
        "noisy": pgm_base64(noisy) if simulate else None,
        "denoised": pgm_base64(denoised),
    }
