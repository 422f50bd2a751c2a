"""Validates the shipped scenario files against docs/scenario.schema.json."""
import json
import pathlib
import sys

import jsonschema

root = pathlib.Path(sys.argv[1])
schema = json.loads((root / "docs" / "scenario.schema.json").read_text())
jsonschema.Draft202012Validator.check_schema(schema)
validator = jsonschema.Draft202012Validator(schema)
count = 0
for path in sorted((root / "data" / "scenarios").glob("*.json")):
    doc = json.loads(path.read_text())
    if isinstance(doc, dict) and "model" in doc:
        validator.validate(doc)
        count += 1
print(f"{count} scenario files valid")
