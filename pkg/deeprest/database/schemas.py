"""
Data models

- Layer and denoising configuration (validated at construction)
- Training / denoising / table reports emitted as JSON
- Run manifests sufficient to reproduce a CLI run
- Numeric containers (transforms, coefficient maps) live in services.model.types
"""
from datetime import datetime
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# Later-layer depth schedules (atom length along the residual volume depth)
DEFAULT_DEPTHS: Tuple[int, ...] = (49, 36, 25, 16)
HIGH_NOISE_DEPTHS: Tuple[int, ...] = (36, 25, 16, 9)
HIGH_NOISE_SIGMA = 100.0
# Two-pass sigma estimates used at sigma = 100
HIGH_NOISE_PASS_SIGMAS: Tuple[float, ...] = (90.0, 20.0)


class PatchSpec(BaseModel):
    """
    a x b x c patch geometry; stride is always 1 with wrap-around
    """
    model_config = ConfigDict(frozen=True)
    a: int                = Field(..., ge=1, description="Patch rows")
    b: int                = Field(..., ge=1, description="Patch columns")
    c: int                = Field(1, ge=1, description="Patch depth (equals the input volume depth)")
    stride: Literal[1]    = Field(1, description="Spatial step between patches")

    @property
    def size(self) -> int:
        """Vectorized patch length n = a*b*c"""
        return self.a * self.b * self.c

    @property
    def area(self) -> int:
        """Number of patches covering each voxel"""
        return self.a * self.b


class LayerConfig(BaseModel):
    """
    Configuration of one transform layer
    """
    model_config = ConfigDict(frozen=True)
    patch: PatchSpec      = Field(..., description="Patch geometry; c equals the input depth")
    eta: float            = Field(..., ge=0, description="Hard threshold")
    keep: Optional[int]   = Field(None, ge=1, description="Residual maps retained for the next layer (ignored for the last layer)")
    iters: int            = Field(100, ge=1, description="Alternations when training this layer")

    @model_validator(mode="after")
    def validate_keep(self) -> "LayerConfig":
        if self.keep is not None and self.keep > self.patch.size:
            raise ValueError(
                f"keep={self.keep} exceeds the layer's filter count {self.patch.size}"
            )
        return self

    @property
    def filters(self) -> int:
        return self.patch.size


class DenoiseConfig(BaseModel):
    """
    Denoising protocol settings

    Thresholds are eta_mult1 * sigma in layer 1 and eta_mult2 * sigma after.
    Later-layer depths default to 49, 36, 25, 16 (36, 25, 16, 9 when sigma >= 100).
    """
    model_config = ConfigDict(frozen=True)
    sigma: float                        = Field(..., gt=0, description="Noise standard deviation (intensity units)")
    layers: int                         = Field(3, ge=1, description="Layer count L")
    patch: int                          = Field(9, ge=1, description="Layer-1 patch side")
    depths: Optional[List[int]]         = Field(None, description="Patch depths of layers 2..L (1x1xc patches)")
    eta_mult1: float                    = Field(3.3, gt=0, description="Layer-1 threshold multiplier")
    eta_mult2: float                    = Field(3.1, gt=0, description="Threshold multiplier for layers >= 2")
    iters: int                          = Field(100, ge=1, description="Alternations per layer")
    passes: int                         = Field(1, ge=1, description="Number of stacked denoising passes")
    pass_sigmas: Optional[List[float]]  = Field(None, description="Per-pass sigma estimates")
    seed: int                           = Field(0, description="Noise generator seed")

    @field_validator("depths")
    @classmethod
    def validate_depths(cls, value: Optional[List[int]]) -> Optional[List[int]]:
        if value is not None and any(d < 1 for d in value):
            raise ValueError("depths must be positive")
        return value

    @field_validator("pass_sigmas")
    @classmethod
    def validate_pass_sigmas(cls, value: Optional[List[float]]) -> Optional[List[float]]:
        if value is not None and any(s <= 0 for s in value):
            raise ValueError("pass_sigmas must be positive")
        return value

    @model_validator(mode="after")
    def validate_schedule(self) -> "DenoiseConfig":
        if self.pass_sigmas is not None and len(self.pass_sigmas) != self.passes:
            raise ValueError(
                f"pass_sigmas has {len(self.pass_sigmas)} entries but passes={self.passes}"
            )
        if self.pass_sigmas is None and self.passes > 1 and not self._uses_high_noise_passes():
            raise ValueError(
                "pass_sigmas are required for multi-pass denoising "
                f"(a default exists only for {len(HIGH_NOISE_PASS_SIGMAS)} passes at sigma={HIGH_NOISE_SIGMA:g})"
            )
        if len(self.resolved_depths()) < self.layers - 1:
            raise ValueError(
                f"{self.layers} layers need {self.layers - 1} depths, got {len(self.resolved_depths())}"
            )
        return self

    def _uses_high_noise_passes(self) -> bool:
        return self.passes == len(HIGH_NOISE_PASS_SIGMAS) and self.sigma == HIGH_NOISE_SIGMA

    def resolved_depths(self) -> List[int]:
        if self.depths is not None:
            return list(self.depths)
        return list(HIGH_NOISE_DEPTHS if self.sigma >= HIGH_NOISE_SIGMA else DEFAULT_DEPTHS)

    def resolved_pass_sigmas(self) -> List[float]:
        if self.pass_sigmas is not None:
            return list(self.pass_sigmas)
        if self.passes == 1:
            return [self.sigma]
        return list(HIGH_NOISE_PASS_SIGMAS)


class LayerReport(BaseModel):
    """
    Training summary of one layer
    """
    layer: int                          = Field(..., description="1-based layer index")
    filters: int                        = Field(..., description="Filter count m_l")
    patch: PatchSpec                    = Field(..., description="Patch geometry")
    eta: float                          = Field(..., description="Threshold used")
    iters: int                          = Field(..., description="Alternations run")
    initial_cost: float                 = Field(..., description="Layer cost at the initial transform")
    cost_trajectory: List[float]        = Field(..., description="Layer cost after every transform update")
    sparsity: float                     = Field(..., description="Nonzero fraction of the coefficient maps")
    retained: Optional[List[int]]       = Field(None, description="Residual maps kept for the next layer")
    unitarity_error: float              = Field(..., description="Frobenius norm of (Omega^T Omega - I)")
    seconds: float                      = Field(..., description="Wall time spent on this layer")


class TrainReport(BaseModel):
    """
    Greedy layer-wise training summary
    """
    image_dims: Tuple[int, int]         = Field(..., description="(height, width) of the training image")
    layers: List[LayerReport]           = Field(default_factory=list, description="Per-layer summaries")
    cost_after_layer: List[float]       = Field(default_factory=list, description="Multi-layer objective after adding each layer")
    seconds: float                      = Field(0.0, description="Total wall time")


class PassReport(BaseModel):
    """
    One denoising pass
    """
    model_config = ConfigDict(ser_json_inf_nan="constants")
    index: int                          = Field(..., description="1-based pass index")
    sigma: float                        = Field(..., description="Sigma estimate that set the thresholds")
    psnr: Optional[float]               = Field(None, description="PSNR of this pass's output (dB), if a clean reference is known")
    sparsity: List[float]               = Field(default_factory=list, description="Per-layer nonzero fraction")
    seconds: float                      = Field(0.0, description="Wall time of this pass")


class DenoiseReport(BaseModel):
    """
    Denoising run summary
    """
    model_config = ConfigDict(ser_json_inf_nan="constants")
    sigma: float                        = Field(..., description="Noise level of the input")
    layers: int                         = Field(..., description="Layer count L")
    input_psnr: Optional[float]         = Field(None, description="PSNR of the noisy input (dB)")
    passes: List[PassReport]            = Field(default_factory=list, description="Per-pass results")
    seconds: float                      = Field(0.0, description="Total wall time")

    @property
    def output_psnr(self) -> Optional[float]:
        return self.passes[-1].psnr if self.passes else None


class TableCell(BaseModel):
    """
    One image x sigma x L result
    """
    model_config = ConfigDict(ser_json_inf_nan="constants")
    image: str                          = Field(..., description="Image name")
    sigma: float                        = Field(..., description="Noise level")
    layers: int                         = Field(..., description="Layer count L")
    seed: int                           = Field(..., description="Noise seed used for this cell")
    input_psnr: float                   = Field(..., description="PSNR of the noisy image (dB)")
    psnr: float                         = Field(..., description="PSNR of the denoised image (dB)")
    seconds: float                      = Field(0.0, description="Wall time of this cell")


class TableReport(BaseModel):
    """
    Batch denoising grid (images x sigmas x layer counts)
    """
    model_config = ConfigDict(ser_json_inf_nan="constants")
    sigmas: List[float]                 = Field(..., description="Noise levels (row groups)")
    layers: List[int]                   = Field(..., description="Layer counts (columns)")
    cells: List[TableCell]              = Field(default_factory=list, description="All computed cells")

    def lookup(self, image: str, sigma: float, layers: int) -> Optional[TableCell]:
        for cell in self.cells:
            if cell.image == image and cell.sigma == sigma and cell.layers == layers:
                return cell
        return None

    def rows(self) -> List[str]:
        """
        Human-readable rows: image, sigma, then one PSNR column per layer count
        """
        header = f"{'Image':<12}{'sigma':>7}" + "".join(f"{'L=' + str(n):>9}" for n in self.layers)
        lines = [header]
        images = list(dict.fromkeys(cell.image for cell in self.cells))
        for image in images:
            for sigma in self.sigmas:
                values = []
                for n in self.layers:
                    cell = self.lookup(image, sigma, n)
                    values.append(f"{cell.psnr:>9.2f}" if cell else f"{'-':>9}")
                lines.append(f"{image:<12}{sigma:>7g}" + "".join(values))
        return lines


class RunManifest(BaseModel):
    """
    Everything needed to repeat a CLI run
    """
    command: str                        = Field(..., description="Subcommand name")
    argv: List[str]                     = Field(default_factory=list, description="Full argument vector")
    config: Dict[str, Any]              = Field(default_factory=dict, description="Resolved configuration snapshot")
    inputs: Dict[str, str]              = Field(default_factory=dict, description="Input path -> sha256")
    outputs: Dict[str, str]             = Field(default_factory=dict, description="Output path -> sha256")
    seed: Optional[int]                 = Field(None, description="Noise seed, if the run used one")
    code_version: str                   = Field(..., description="Package version")
    python_version: str                 = Field(..., description="Interpreter version")
    numpy_version: str                  = Field(..., description="numpy version")
    created_at: datetime                = Field(default_factory=datetime.now, description="Timestamp of the run")
