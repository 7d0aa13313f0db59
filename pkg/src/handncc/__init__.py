"""Static hand-gesture recognition by normalized cross-correlation template matching."""

__version__ = "0.1.0"

from .classifier import (
    EmptyForegroundError,
    GestureTemplate,
    RecognitionResult,
    TemplateRegistry,
    enroll,
    load_registry,
    preprocess,
    recognize,
    save_registry,
    score,
)
from .correlation import autocorrelation_map, make_kernel, match_point, ncc_map_fast, ncc_map_reference
from .evalkit import EvaluationReport, accuracy_pct, evaluate, render_report
from .morphology import StructuringElement, closing, denoise, dilate, erode, largest_component, opening
from .raster import BinaryImage, GrayImage, binary_to_gray, decode_pgm, encode_pgm, resize_nearest
from .segmentation import binarize, histogram, otsu_threshold
from .synthgest import class_spec, generate_dataset, render
