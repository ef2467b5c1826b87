import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

from src.core.raster import build_integral, crop_to_box, discretize, mask_total
from src.models.box import Box, PixelBox
from src.models.raster import BinaryMask, IntegralImage

logger = logging.getLogger(__name__)


class ProximityMeasure(str, Enum):
    """Anchor-to-ground-truth proximity used by the assigners"""
    IOU = "iou"
    GIOU = "giou"
    DIOU = "diou"
    MAIOU = "maiou"

    @classmethod
    def parse(cls, value) -> "ProximityMeasure":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(
                f"Unknown proximity measure {value!r}; valid names: {', '.join(m.value for m in cls)}"
            ) from None

    @property
    def is_mask_aware(self) -> bool:
        return self is ProximityMeasure.MAIOU


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """
    One annotated object: box, mask and the cached integral image of the mask.

    Build with GroundTruth.build, which clips the mask to the box's pixel
    cover so that every mask pixel lies inside B.
    """
    box: Box
    mask: BinaryMask
    integral: IntegralImage
    mask_count: int
    pixel_box: PixelBox
    category: int = 0
    annotation_id: Optional[int] = field(default=None)

    @classmethod
    def build(cls, box: Box, mask: BinaryMask, category: int = 0,
              annotation_id: Optional[int] = None) -> "GroundTruth":
        m, n = mask.shape
        pb = discretize(box, m, n)
        if pb is None:
            raise ValueError(f"Ground-truth box {box.as_tuple()} has no pixels on the {m}x{n} grid")
        clipped = crop_to_box(mask, pb)
        integral = build_integral(clipped)
        count = mask_total(integral)

        dropped = mask.count() - count
        if dropped:
            logger.debug(f"Dropped {dropped} mask pixels outside box {box.as_tuple()}")
        if count == 0:
            logger.warning(
                f"Ground truth {annotation_id if annotation_id is not None else box.as_tuple()} "
                "has an empty mask; maIoU falls back to pixel IoU"
            )

        return cls(
            box=box,
            mask=clipped,
            integral=integral,
            mask_count=count,
            pixel_box=pb,
            category=category,
            annotation_id=annotation_id,
        )

    @property
    def shape(self) -> Tuple[int, int]:
        return self.mask.shape

    @property
    def box_pixels(self) -> int:
        """|B| in the pixel domain"""
        return self.pixel_box.area

    @property
    def empty_mask(self) -> bool:
        return self.mask_count == 0

    @property
    def mob(self) -> float:
        """MOB(B, M) = |M| / |B|"""
        return self.mask_count / self.box_pixels


@dataclass(frozen=True, eq=False)
class Scene:
    """All usable ground truths of one image"""
    image_id: int
    width: int
    height: int
    gts: Tuple[GroundTruth, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gts", tuple(self.gts))
        if self.width < 1 or self.height < 1:
            raise ValueError(f"Scene {self.image_id} must be at least 1x1, got {self.width}x{self.height}")
        for gt in self.gts:
            if gt.shape != (self.height, self.width):
                raise ValueError(
                    f"Scene {self.image_id} is {self.height}x{self.width} but a mask is {gt.shape[0]}x{gt.shape[1]}"
                )
            if gt.box.x1 < 0 or gt.box.y1 < 0 or gt.box.x2 > self.width or gt.box.y2 > self.height:
                raise ValueError(f"Scene {self.image_id}: box {gt.box.as_tuple()} leaves the image")

    def __len__(self):
        return len(self.gts)

    def same_as(self, other: "Scene") -> bool:
        """Field-by-field equality, masks compared cell by cell"""
        if (self.image_id, self.width, self.height, len(self.gts)) != \
                (other.image_id, other.width, other.height, len(other.gts)):
            return False
        return all(
            a.box == b.box and a.mask == b.mask and a.category == b.category
            and a.annotation_id == b.annotation_id
            for a, b in zip(self.gts, other.gts)
        )
