from .extract import ParserFailure, RULESET, VERSION, extract_tags
from .cli import process_file

__all__ = ["ParserFailure", "RULESET", "VERSION", "extract_tags", "process_file"]
