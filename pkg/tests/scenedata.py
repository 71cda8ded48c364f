"""Committed structured-scene fixture: one indoor sample with a reference
scene extracted from ground-truth context and a prediction extracted from
the attacked path. The relation sets intersect in exactly one triple."""
from semleak.metrics import StructuredScene

REFERENCE_OBJECTS = [
    "table", "chair", "shelf", "cabinet", "refrigerator", "microwave",
    "sink", "toaster oven", "lighting", "sofa", "window", "blind",
]

REFERENCE_RELATIONS = [
    ("chair", "next_to", "table"),
    ("microwave", "on", "shelf"),
    ("toaster oven", "on", "shelf"),
    ("shelf", "next_to", "refrigerator"),
    ("sink", "next_to", "cabinet"),
    ("cabinet", "over", "sink"),
    ("sofa", "next_to", "table"),
    ("blind", "covering", "window"),
    ("lighting", "hanging_over", "table"),
    ("shelf", "next_to", "blind"),
]

REFERENCE_SCENES = [("kitchen", 0.95), ("living room", 0.40)]

PREDICTED_OBJECTS = [
    "table", "chair", "cabinet", "countertop", "window", "potted plant",
    "stove", "kitchen sink", "light fixture",
]

PREDICTED_RELATIONS = [
    ("chair", "next_to", "table"),
    ("potted plant", "on", "table"),
    ("cabinet", "over", "countertop"),
    ("stove", "part_of", "countertop"),
    ("kitchen sink", "part_of", "countertop"),
    ("light fixture", "hanging_over", "table"),
    ("cabinet", "next_to", "window"),
]

PREDICTED_SCENES = [("kitchen", 1.0)]

HUMAN_CAPTIONS = [
    "The kitchen area is clean and ready for us to use.",
    "A kitchen with a wooden table surrounded by black chairs.",
    "A small kitchen and dining room area that has multiple metal shelves "
    "with items on it.",
    "The kitchen and eating area of an apartment.",
    "A kitchen and dining area combined into one open space with track "
    "lighting on the ceiling.",
]

GROUND_TRUTH_TAGS = [
    "multiple shelf", "kitchen area", "apartment area", "area combine into space",
    "metal shelf", "wooden table", "track lighting", "open space",
    "table kitchen", "room area", "multiple metal shelf", "that have shelf",
    "area combine with lighting", "dining room", "it item",
    "area combine on ceiling", "black chair", "small area",
    "kitchen apartment area", "small kitchen room area", "that have with item",
]

ATTACK_PATH_TAGS = [
    "kitchen table", "table kitchen", "yellow kitchen", "wooden kitchen table",
    "wood kitchen table", "kitchen chair", "table space", "empty table kitchen",
    "kitchen feature table", "table have kitchen",
]

VICTIM_PATH_TAGS = [
    "kitchen table", "table kitchen", "kitchen space", "open kitchen",
    "kitchen area", "kitchen middle", "counter space", "kitchen apartment",
    "ktichen table", "apartment kitchen",
]

VICTIM_PATH_CAPTIONS = [
    "The kitchen table is in the middle of the apartment.",
    "This open kitchen has a lot of counter space.",
    "The kitchen area features a large table.",
    "An apartment kitchen with an open floor plan.",
    "A table sits in the middle of the kitchen space.",
]

VICTIM_SCENE_CAPTIONS = [
    "A kitchen features a stove and sink integrated into the countertop with "
    "cabinets mounted overhead and next to the window.",
    "A potted plant sits on the table next to a chair, directly beneath a "
    "hanging light fixture in the kitchen.",
    "The kitchen layout includes a countertop with a built-in stove and sink, "
    "complemented by several cabinets and a nearby dining table.",
    "In this kitchen, a light fixture hangs over a table where a potted plant "
    "rests beside a chair.",
    "Upper cabinets are positioned over the countertop and beside a window, "
    "overlooking a kitchen area with a small dining set.",
]

GT_PATH_CAPTIONS = [
    "The kitchen and dining room combine into one open space with multiple "
    "metal shelves.",
    "A small apartment area has track lighting on the ceiling.",
    "A wooden table and black chairs are in the kitchen area.",
    "Multiple shelves hold various items in the small kitchen room.",
    "The open space combines a kitchen and dining area with a wooden table.",
]


def reference_scene() -> StructuredScene:
    return StructuredScene(objects=set(REFERENCE_OBJECTS),
                           relations=set(REFERENCE_RELATIONS),
                           scenes=list(REFERENCE_SCENES))


def predicted_scene() -> StructuredScene:
    return StructuredScene(objects=set(PREDICTED_OBJECTS),
                           relations=set(PREDICTED_RELATIONS),
                           scenes=list(PREDICTED_SCENES))
