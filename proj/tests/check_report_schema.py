"""Run the CLI on a small synthetic dataset and validate report.json with jsonschema."""
import json
import pathlib
import subprocess
import sys

import jsonschema

cli, schema_path, work = sys.argv[1], sys.argv[2], pathlib.Path(sys.argv[3])
work.mkdir(parents=True, exist_ok=True)
data = work / "loans.csv"
subprocess.run([cli, "synth", "--seed", "7", "--rows", "400", "--out", str(data)], check=True)
subprocess.run([cli, "report", "--data", str(data), "--target", "result", "--positive", "accepted",
                "--sensitive", "citizenship,gender", "--metrics", "spd,disparate_impact,eq_opp_diff,theil",
                "--out", str(work / "out")], check=True)
schema = json.loads(pathlib.Path(schema_path).read_text())
jsonschema.Draft202012Validator.check_schema(schema)
jsonschema.validate(json.loads((work / "out" / "report.json").read_text()), schema,
                    cls=jsonschema.Draft202012Validator)
print("report.json valid")
