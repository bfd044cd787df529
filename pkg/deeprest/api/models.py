"""
Model training and reconstruction endpoints
"""
import uuid
from typing import Optional

from fastapi import APIRouter, File, Form, HTTPException, UploadFile
from starlette.concurrency import run_in_threadpool

from deeprest.api.utils import http_errors, json_db, parse_int_list, pgm_base64, read_upload_image
from deeprest.database import storage
from deeprest.services.denoiser import default_depths, default_layer_configs, psnr
from deeprest.services.learn import train_model
from deeprest.services.model import DeepRestModel, decode, encode

router = APIRouter()


def _check_model_id(model_id: str) -> str:
    try:
        return str(uuid.UUID(model_id))
    except ValueError:
        raise HTTPException(status_code=400, detail=f"Invalid model id: {model_id}")


def _load(model_id: str) -> DeepRestModel:
    model_id = _check_model_id(model_id)
    with http_errors():
        model = storage.get_stored_model(model_id)
    if model is None:
        raise HTTPException(status_code=404, detail=f"Model {model_id} not found")
    return model


@router.post("/models")
async def create_model(
    image: UploadFile = File(..., description="Training image"),
    sigma: float = Form(..., gt=0, description="Thresholds are eta_mult * sigma"),
    layers: int = Form(3),
    patch: int = Form(9),
    depths: Optional[str] = Form(None, description="Depths of layers 2..L, e.g. 49,36"),
    eta_mult1: float = Form(3.3),
    eta_mult2: float = Form(3.1),
    iters: int = Form(100),
    init: str = Form("dct", pattern="^(dct|identity)$"),
):
    """
    Train a model on the uploaded image and store it

    Returns the new model id and the training report.
    """
    img = await read_upload_image(image)
    with http_errors():
        schedule = parse_int_list(depths)
        configs = default_layer_configs(
            sigma,
            layers,
            patch,
            schedule if schedule else default_depths(sigma, layers),
            eta_mult1,
            eta_mult2,
            iters,
        )
        model, report = await run_in_threadpool(train_model, img, configs, init)
    model_id = storage.store_model(model, report)
    return {"id": model_id, "model": storage.model_summary(model), "report": report.model_dump()}


@router.get("/models/{model_id}")
async def get_model(model_id: str):
    """
    Stored model summary and its training report
    """
    model = _load(model_id)
    return {
        "id": model_id,
        "model": storage.model_summary(model),
        "report": storage.get_stored_report(_check_model_id(model_id)),
    }


@router.post("/models/{model_id}/reconstruct")
async def reconstruct(model_id: str, image: UploadFile = File(...)):
    """
    Encode then decode an image with a stored model

    Returns per-layer sparsity, PSNR against the upload and the reconstruction.
    """
    model = _load(model_id)
    img = await read_upload_image(image)
    with http_errors():
        enc = await run_in_threadpool(encode, img, model)
        recon = await run_in_threadpool(decode, enc, model)
    return {
        "id": model_id,
        "sparsity": list(enc.sparsity()),
        "psnr": json_db(psnr(img, recon)),
        "reconstruction": pgm_base64(recon),
    }


@router.delete("/models/{model_id}")
async def delete_model(model_id: str):
    model_id = _check_model_id(model_id)
    if not storage.delete_stored_model(model_id):
        raise HTTPException(status_code=404, detail=f"Model {model_id} not found")
    return {"id": model_id, "deleted": True}
