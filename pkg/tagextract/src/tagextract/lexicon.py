"""Word lists and lemmatization rules for caption-domain tagging.

The caption domain is narrow (short declarative scene descriptions), so a
closed lexicon of function words plus common caption adjectives/verbs and a
rule lemmatizer cover it well; anything unknown defaults to a noun.
"""

DETERMINERS = {
    "a", "an", "the", "this", "that", "these", "those", "some", "any",
    "each", "every", "no", "another", "both", "all", "its", "his", "her",
    "their", "our", "my", "your", "one", "two", "three", "four", "five",
    "six", "seven", "eight", "nine", "ten",
}

PRONOUNS = {
    "he", "she", "it", "they", "we", "you", "i", "them", "him", "us",
    "himself", "herself", "itself", "themselves", "someone", "something",
    "who", "which", "what",
}

PREPOSITIONS = {
    "of", "in", "on", "at", "with", "by", "for", "from", "to", "into",
    "onto", "over", "under", "near", "beside", "behind", "above", "below",
    "across", "through", "around", "between", "against", "along", "inside",
    "outside", "atop", "upon", "off", "down", "up", "beneath", "amid",
    "among", "toward", "towards", "past", "beyond", "during", "without",
}

CONJUNCTIONS = {"and", "or", "but", "while", "as", "when", "where", "so",
                "because", "if", "though", "although", "than"}

AUXILIARIES = {
    "is", "are", "was", "were", "be", "been", "being", "am",
    "has", "have", "had", "having",
    "do", "does", "did",
    "will", "would", "can", "could", "may", "might", "shall", "should",
    "must", "getting", "gets", "get", "got",
}

ADVERBS = {"very", "quite", "really", "just", "also", "too", "together",
           "alone", "away", "here", "there", "not", "nearby", "outdoors",
           "indoors", "partially", "fully", "neatly"}

ADJECTIVES = {
    # colors
    "red", "blue", "green", "yellow", "black", "white", "brown", "gray",
    "grey", "orange", "purple", "pink", "golden", "silver", "tan", "beige",
    "colorful", "dark", "light", "bright", "pale",
    # size / shape / age / state
    "small", "large", "big", "little", "tall", "short", "long", "wide",
    "narrow", "tiny", "huge", "giant", "old", "young", "new", "modern",
    "vintage", "antique", "round", "square", "clean", "dirty", "empty",
    "full", "open", "closed", "busy", "quiet", "fresh", "ripe", "shiny",
    "rusty", "broken", "cozy", "sunny", "cloudy", "rainy", "snowy", "wet",
    "dry", "warm", "cold", "hot", "double", "single", "several", "many",
    "few", "multiple", "various", "different", "numerous", "plenty",
    "beautiful", "pretty", "cute", "fluffy", "furry", "spotted", "striped",
    "crowded", "grassy", "sandy", "rocky", "steep", "lush", "ornate",
    "fancy", "plain", "deep", "shallow", "sliced", "stacked", "assorted",
    "delicious", "tasty", "juicy", "crispy", "toasted", "grilled",
    # materials
    "wooden", "metal", "metallic", "plastic", "ceramic", "leather",
    "stone", "brick", "concrete", "marble", "wicker", "steel", "glass",
    "paper", "cardboard", "tile", "tiled",
}

VERBS = {
    "sit", "stand", "hold", "ride", "walk", "run", "play", "eat", "drink",
    "look", "watch", "wear", "carry", "jump", "fly", "swim", "drive",
    "lie", "lay", "hang", "rest", "lean", "surround", "cover", "fill",
    "contain", "feature", "include", "serve", "prepare", "cut", "cook",
    "gather", "graze", "perform", "throw", "catch", "hit", "kick", "smile",
    "pose", "read", "talk", "use", "work", "sleep", "stare", "point",
    "reach", "grab", "pull", "push", "climb", "cross", "pass", "wait",
    "park", "stop", "land", "float", "sail", "race", "chase", "feed",
    "pet", "lead", "follow", "face", "overlook", "display", "show",
    "decorate", "top", "place", "set", "arrange", "line", "share",
    "enjoy", "travel", "move", "turn", "board", "pack", "slice", "bite",
    "combine", "attach", "connect", "mount", "store", "ski", "skate",
    "surf", "snowboard", "swing", "bat", "pitch", "dine", "shop", "browse",
}

IRREGULAR_VERB_LEMMAS = {
    "sat": "sit", "stood": "stand", "held": "hold", "rode": "ride",
    "ran": "run", "ate": "eat", "eaten": "eat", "drank": "drink",
    "drunk": "drink", "wore": "wear", "worn": "wear", "flew": "fly",
    "flown": "fly", "swam": "swim", "swum": "swim", "drove": "drive",
    "driven": "drive", "lay": "lie", "lain": "lie", "hung": "hang",
    "threw": "throw", "thrown": "throw", "caught": "catch", "hid": "hide",
    "hidden": "hide", "took": "take", "taken": "take", "made": "make",
    "went": "go", "gone": "go", "came": "come", "said": "say",
    "seen": "see", "saw": "see", "done": "do", "left": "leave",
    "built": "build", "put": "put", "read": "read", "set": "set",
    "hit": "hit", "let": "let", "led": "lead", "fed": "feed",
    "slept": "sleep", "lit": "light", "laid": "lay", "given": "give",
    "gave": "give", "grown": "grow", "grew": "grow", "slid": "slide",
    "spread": "spread", "cut": "cut",
}

IRREGULAR_NOUN_LEMMAS = {
    "men": "man", "women": "woman", "children": "child", "people": "person",
    "feet": "foot", "teeth": "tooth", "mice": "mouse", "geese": "goose",
    "shelves": "shelf", "knives": "knife", "leaves": "leaf", "loaves": "loaf",
    "wolves": "wolf", "calves": "calf", "halves": "half", "lives": "life",
    "dishes": "dish", "glasses": "glass", "benches": "bench",
    "sandwiches": "sandwich", "beaches": "beach", "buses": "bus",
    "couches": "couch", "boxes": "box", "foxes": "fox", "watches": "watch",
    "brushes": "brush", "bushes": "bush", "peaches": "peach",
    "sheep": "sheep", "fish": "fish", "deer": "deer", "scissors": "scissors",
}

_VOWELS = "aeiou"


def lemma_noun(word: str) -> str:
    w = word.lower()
    if w in IRREGULAR_NOUN_LEMMAS:
        return IRREGULAR_NOUN_LEMMAS[w]
    if len(w) > 3 and w.endswith("ies"):
        return w[:-3] + "y"
    if len(w) > 3 and w.endswith(("ches", "shes", "sses", "xes", "zes")):
        return w[:-2]
    if len(w) > 3 and w.endswith("oes"):
        return w[:-2]
    if len(w) > 2 and w.endswith("s") and not w.endswith(("ss", "us", "is")):
        return w[:-1]
    return w


def _strip_inflection(word: str, suffix: str) -> str:
    stem = word[: -len(suffix)]
    if len(stem) >= 3 and stem[-1] == stem[-2] and stem[-1] not in _VOWELS \
            and stem[-1] not in "lsz":
        return stem[:-1]                      # running -> run, sitting -> sit
    candidate = stem + "e"
    if candidate in VERBS:                    # riding -> ride, serving -> serve
        return candidate
    return stem


def lemma_verb(word: str) -> str:
    w = word.lower()
    if w in IRREGULAR_VERB_LEMMAS:
        return IRREGULAR_VERB_LEMMAS[w]
    if w in VERBS:
        return w
    if len(w) > 4 and w.endswith("ing"):
        return _strip_inflection(w, "ing")
    if len(w) > 3 and w.endswith("ied"):
        return w[:-3] + "y"
    if len(w) > 3 and w.endswith("ed"):
        stem = _strip_inflection(w, "ed")
        return stem if stem else w
    if len(w) > 3 and w.endswith("ies"):
        return w[:-3] + "y"
    if len(w) > 2 and w.endswith("es") and w[:-2] in VERBS:
        return w[:-2]
    if len(w) > 2 and w.endswith("s") and not w.endswith("ss"):
        return w[:-1]
    return w
