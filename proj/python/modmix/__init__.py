"""DHS pseudo-images, inter-modality mixing, dataset building and AP evaluation."""

import json

from ._modmix import (
    DEFAULT_SEED,
    FormatError,
    InvalidInput,
    __version__,
    apply_mask,
    box_iou,
    build_dataset,
    coco_thresholds,
    cppm_mask,
    dhs_image,
    encode_dhs,
    load_cloud,
    read_opc,
    region_stats,
    sffm_batch,
    sffm_mask,
    write_opc,
)
from ._modmix import _evaluate_json


def evaluate(detections, ground_truth, subgroups=("sunrgbd10", "sunrgbd16"), thresholds=None, zero_fill=False):
    """Evaluate COCO results against a COCO ground-truth document.

    detections is a list of {image_id, category_id, bbox, score} dicts and
    ground_truth a COCO document as a dict. Returns the report rows as a dict.
    """
    if thresholds is None:
        thresholds = coco_thresholds()
    report = _evaluate_json(json.dumps(detections), json.dumps(ground_truth), list(subgroups), list(thresholds),
                            zero_fill)
    return json.loads(report)


__all__ = [
    "DEFAULT_SEED",
    "FormatError",
    "InvalidInput",
    "__version__",
    "apply_mask",
    "box_iou",
    "build_dataset",
    "coco_thresholds",
    "cppm_mask",
    "dhs_image",
    "encode_dhs",
    "evaluate",
    "load_cloud",
    "read_opc",
    "region_stats",
    "sffm_batch",
    "sffm_mask",
    "write_opc",
]
