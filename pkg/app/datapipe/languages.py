"""Supported languages, their scripts, curriculum tier and corpus size"""
from collections import namedtuple

Language = namedtuple('Language', ['code', 'name', 'script', 'tier', 'count'])

# tier: 1 foundation (English), 2 mid/high resource, 3 low resource.
# count: fine-tuning instances. Manipuri is not listed in the size table;
# its count is a placeholder reflecting "minimal training samples".
LANGUAGES = (
    Language('en', 'English', 'latin', 1, 89_000),
    Language('hi', 'Hindi', 'devanagari', 2, 123_000),
    Language('te', 'Telugu', 'telugu', 2, 115_000),
    Language('ta', 'Tamil', 'tamil', 2, 122_000),
    Language('bn', 'Bengali', 'bengali', 2, 126_000),
    Language('ml', 'Malayalam', 'malayalam', 2, 125_000),
    Language('mr', 'Marathi', 'devanagari', 2, 126_000),
    Language('kn', 'Kannada', 'kannada', 2, 110_000),
    Language('gu', 'Gujarati', 'gujarati', 2, 102_000),
    Language('as', 'Assamese', 'bengali', 2, 106_000),
    Language('or', 'Odia', 'oriya', 2, 106_000),
    Language('pa', 'Punjabi', 'gurmukhi', 2, 104_000),
    Language('sd', 'Sindhi', 'arabic', 2, 58_000),
    Language('ur', 'Urdu', 'arabic', 2, 123_000),
    Language('brx', 'Bodo', 'devanagari', 3, 36_000),
    Language('doi', 'Dogri', 'devanagari', 3, 3_000),
    Language('kok', 'Konkani', 'devanagari', 3, 42_000),
    Language('ks', 'Kashmiri', 'arabic', 3, 35_000),
    Language('mai', 'Maithili', 'devanagari', 3, 46_000),
    Language('mni', 'Manipuri', 'bengali', 3, 1_000),
    Language('ne', 'Nepali', 'devanagari', 3, 127_000),
    Language('sa', 'Sanskrit', 'devanagari', 3, 75_000),
    Language('sat', 'Santali', 'ol_chiki', 3, 66_000),
)

# Held out of every training phase; evaluated zero-shot.
ZERO_SHOT = (
    Language('bho', 'Bhojpuri', 'devanagari', 0, 0),
)

BY_CODE = {lang.code: lang for lang in LANGUAGES + ZERO_SHOT}


def codes(tier=None):
    """Language codes in table order, optionally for one tier"""
    return [lang.code for lang in LANGUAGES
            if tier is None or lang.tier == tier]


def default_counts():
    return {lang.code: lang.count for lang in LANGUAGES}
