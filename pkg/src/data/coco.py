"""
COCO instances ingestion.

Polygons (single or multi-part) and uncompressed RLE are decoded at native
image resolution; compressed RLE is rejected. Boxes come from the bbox field,
clamped to the image.
"""

import json
import logging
from collections import Counter, defaultdict
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from src.core.raster import decode_rle, mask_extent, rasterize_polygon
from src.models.box import Box
from src.models.ground_truth import GroundTruth, Scene
from src.models.raster import BinaryMask
from src.utils.errors import InputError, InvalidAnnotationError, UnsupportedFormatError
from src.utils.parallel import ordered_map

logger = logging.getLogger(__name__)


##############################################################################
# File schema
##############################################################################

class CocoImage(BaseModel):
    id: int
    width: int = Field(ge=1)
    height: int = Field(ge=1)
    file_name: Optional[str] = None

    model_config = ConfigDict(extra="ignore")


class CocoAnnotation(BaseModel):
    id: int
    image_id: int
    bbox: List[float]
    segmentation: Union[List[List[float]], Dict[str, Any], None] = None
    iscrowd: int = 0
    category_id: int = 0

    model_config = ConfigDict(extra="ignore")

    @field_validator("bbox")
    def validate_bbox(cls, v):
        if len(v) != 4:
            raise ValueError(f"bbox must be [x, y, w, h], got {len(v)} values")
        return v

    @property
    def is_crowd(self) -> bool:
        return bool(self.iscrowd)

    def corners(self) -> Tuple[float, float, float, float]:
        x, y, w, h = self.bbox
        return x, y, x + w, y + h


class CocoFile(BaseModel):
    images: List[CocoImage]
    annotations: List[CocoAnnotation] = Field(default_factory=list)
    categories: List[Dict[str, Any]] = Field(default_factory=list)

    model_config = ConfigDict(extra="ignore")


class LoadOptions(BaseModel):
    include_crowd: bool = False
    workers: int = Field(1, ge=1)
    # relative bbox/mask extent disagreement that triggers a warning
    extent_tolerance: float = Field(0.10, ge=0.0)


class LoadStats(BaseModel):
    """What the loader kept and what it skipped"""
    images: int = 0
    annotations: int = 0
    scenes: int = 0
    gts: int = 0
    skipped_crowd: int = 0
    skipped_zero_size: int = 0
    skipped_invalid: int = 0
    skipped_unknown_image: int = 0
    extent_mismatch: int = 0

    @property
    def skipped(self) -> int:
        return self.skipped_crowd + self.skipped_zero_size + self.skipped_invalid + self.skipped_unknown_image


##############################################################################
# Decoding
##############################################################################

def read_coco(path: Union[str, Path]) -> CocoFile:
    """Parse and schema-check a COCO instances file"""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise InputError(path, "no such file") from None
    except (OSError, UnicodeDecodeError) as e:
        raise InputError(path, f"cannot read file: {e}") from e

    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(path, f"malformed JSON: {e.msg}", line=e.lineno, column=e.colno) from e

    try:
        return CocoFile.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(p) for p in first["loc"])
        raise InputError(path, f"not a COCO instances file ({where}: {first['msg']})") from e


def decode_segmentation(ann: CocoAnnotation, height: int, width: int) -> BinaryMask:
    """Rasterize an annotation's segmentation on the image grid"""
    seg = ann.segmentation
    if seg is None or (isinstance(seg, list) and not seg):
        raise InvalidAnnotationError("missing segmentation", ann.id)

    if isinstance(seg, dict):
        counts = seg.get("counts")
        if isinstance(counts, (str, bytes)):
            raise UnsupportedFormatError("compressed RLE segmentation is not supported", ann.id)
        size = seg.get("size")
        if size is not None and list(size) != [height, width]:
            raise InvalidAnnotationError(f"RLE size {size} does not match image {height}x{width}", ann.id)
        if not isinstance(counts, list):
            raise InvalidAnnotationError("RLE segmentation has no counts list", ann.id)
        try:
            return decode_rle(counts, height, width)
        except InvalidAnnotationError as e:
            raise InvalidAnnotationError(str(e), ann.id) from e

    # multi-part polygons are the union of their parts
    mask = None
    for flat in seg:
        if len(flat) % 2:
            raise InvalidAnnotationError(f"polygon has an odd number of coordinates ({len(flat)})", ann.id)
        vertices = list(zip(flat[0::2], flat[1::2]))
        try:
            part = rasterize_polygon(vertices, height, width)
        except InvalidAnnotationError as e:
            raise InvalidAnnotationError(str(e), ann.id) from e
        mask = part if mask is None else mask.union(part)
    return mask


def _extent_disagrees(mask: BinaryMask, box: Box, tolerance: float) -> bool:
    extent = mask_extent(mask)
    if extent is None:
        return False
    dw = abs((extent.x2 - extent.x1) - box.width) / box.width
    dh = abs((extent.y2 - extent.y1) - box.height) / box.height
    return dw > tolerance or dh > tolerance


def _build_scene(image: CocoImage, anns: List[CocoAnnotation],
                 options: LoadOptions) -> Tuple[Optional[Scene], Counter]:
    counts = Counter()
    gts = []
    for ann in anns:
        if ann.is_crowd and not options.include_crowd:
            counts["skipped_crowd"] += 1
            continue

        x1, y1, x2, y2 = ann.corners()
        x1, y1 = max(0.0, x1), max(0.0, y1)
        x2, y2 = min(float(image.width), x2), min(float(image.height), y2)
        if not (x2 > x1 and y2 > y1):
            counts["skipped_zero_size"] += 1
            logger.debug(f"Annotation {ann.id}: zero-size box {ann.bbox} after clamping")
            continue
        box = Box(x1, y1, x2, y2)

        try:
            mask = decode_segmentation(ann, image.height, image.width)
        except UnsupportedFormatError:
            raise
        except InvalidAnnotationError as e:
            counts["skipped_invalid"] += 1
            logger.debug(f"Skipping {e}")
            continue

        if _extent_disagrees(mask, box, options.extent_tolerance):
            counts["extent_mismatch"] += 1
            logger.debug(f"Annotation {ann.id}: mask extent disagrees with bbox {ann.bbox}")

        gts.append(GroundTruth.build(box, mask, category=ann.category_id, annotation_id=ann.id))

    if not gts:
        return None, counts
    return Scene(image_id=image.id, width=image.width, height=image.height, gts=tuple(gts)), counts


def load_with_stats(path: Union[str, Path],
                    options: Optional[LoadOptions] = None) -> Tuple[List[Scene], LoadStats]:
    """
    Load every image with at least one usable annotation.

    Scenes are ordered by image id and ground truths by annotation id, whatever
    the order in the file and the worker count.
    """
    options = options or LoadOptions()
    coco = read_coco(path)

    images = {img.id: img for img in coco.images}
    by_image: Dict[int, List[CocoAnnotation]] = defaultdict(list)
    stats = LoadStats(images=len(images), annotations=len(coco.annotations))
    for ann in coco.annotations:
        if ann.image_id not in images:
            stats.skipped_unknown_image += 1
            continue
        by_image[ann.image_id].append(ann)

    jobs = [
        (images[image_id], sorted(by_image[image_id], key=lambda a: a.id))
        for image_id in sorted(by_image)
    ]
    results = ordered_map(lambda job: _build_scene(job[0], job[1], options), jobs, options.workers)

    scenes = []
    totals = Counter()
    for scene, counts in results:
        totals.update(counts)
        if scene is not None:
            scenes.append(scene)
    for key, value in totals.items():
        setattr(stats, key, value)
    stats.scenes = len(scenes)
    stats.gts = sum(len(s) for s in scenes)

    if stats.skipped_crowd:
        logger.info(f"{path}: skipped {stats.skipped_crowd} crowd annotations")
    if stats.skipped_zero_size:
        logger.warning(f"{path}: skipped {stats.skipped_zero_size} zero-size annotations")
    if stats.skipped_invalid:
        logger.warning(f"{path}: skipped {stats.skipped_invalid} annotations with invalid segmentation")
    if stats.skipped_unknown_image:
        logger.warning(f"{path}: skipped {stats.skipped_unknown_image} annotations for unknown images")
    if stats.extent_mismatch:
        logger.warning(
            f"{path}: {stats.extent_mismatch} annotations have a mask extent more than "
            f"{options.extent_tolerance:.0%} off their bbox"
        )
    logger.info(f"Loaded {stats.gts} ground truths in {stats.scenes} scenes from {path}")
    return scenes, stats


def load_annotations(path: Union[str, Path], options: Optional[LoadOptions] = None) -> List[Scene]:
    scenes, _ = load_with_stats(path, options)
    return scenes
