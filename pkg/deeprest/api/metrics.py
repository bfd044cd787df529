"""
Image quality endpoint
"""
from fastapi import APIRouter, File, UploadFile

from deeprest.api.utils import http_errors, json_db, read_upload_image
from deeprest.services.denoiser import psnr

router = APIRouter()


@router.post("/psnr")
async def compute_psnr(
    reference: UploadFile = File(...),
    test: UploadFile = File(...),
):
    """
    PSNR in dB between two images of equal size; "inf" when identical
    """
    ref_img = await read_upload_image(reference)
    test_img = await read_upload_image(test)
    with http_errors():
        value = psnr(ref_img, test_img)
    return {"psnr": json_db(value), "dims": list(ref_img.shape)}
