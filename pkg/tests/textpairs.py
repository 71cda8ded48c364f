"""Thirty (hypothesis, references) pairs covering identity, disjoint
vocabularies, partial overlap, repetition, length mismatch, multi-reference
sets, punctuation, and non-ASCII text."""

PAIRS = [
    ("the cat sat on the mat", ["the cat is on the mat"]),
    ("a dog runs across the yard", ["the dog ran across a yard quickly"]),
    ("completely different words here", ["nothing shared at all between"]),
    ("identical sentence for both sides", ["identical sentence for both sides"]),
    ("one two three four five six", ["one two three", "four five six"]),
    ("the quick brown fox jumps over the lazy dog",
     ["a quick brown dog jumps over a lazy fox"]),
    ("repetition repetition repetition", ["repetition once only"]),
    ("short", ["a much longer reference sentence with many words"]),
    ("a very long hypothesis that keeps going and going with detail",
     ["short ref"]),
    ("kitchen with a wooden table", ["a kitchen with a wooden table "
                                     "surrounded by black chairs"]),
    ("black chairs surround the table", ["a kitchen with a wooden table "
                                         "surrounded by black chairs"]),
    ("numbers 1 2 3 in text", ["numbers 1 2 3 in text form"]),
    ("punctuation, should; not! matter?", ["punctuation should not matter"]),
    ("Case Should Not Matter", ["case should not matter"]),
    ("the cats are sleeping", ["the cat is sleeping"]),
    ("running jumping swimming", ["runs jumps swims"]),
    ("a b c d e f g", ["a b c d e f g h i j"]),
    ("x y z", ["p q r"]),
    ("the house near the lake", ["the house by the lake",
                                 "a cottage near the water"]),
    ("uno dos tres cuatro", ["uno dos tres cuatro cinco"]),
    ("café au lait on the terrace", ["café au lait on a terrace"]),
    ("the same words in different order appear",
     ["appear order different in words same the"]),
    ("alpha beta gamma delta epsilon", ["alpha beta gamma", "delta epsilon"]),
    ("he buys fresh bread every morning", ["she bought fresh bread each morning"]),
    ("two plus two equals four", ["two plus two equals four", "2 + 2 = 4"]),
    ("deep learning models require data", ["machine learning needs data"]),
    ("an apple a day", ["an apple a day keeps the doctor away"]),
    ("wind turbines generate clean power",
     ["turbines generate power", "wind farms make clean energy"]),
    ("il fait beau aujourd'hui", ["il fait tres beau aujourd'hui"]),
    ("the end", ["the end", "the beginning"]),
]
