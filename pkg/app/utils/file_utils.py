"""
File utilities for RingSplit: result directories, traces, message logs and final states.
"""
import os
import csv
import json
from datetime import datetime
import config

TRACE_HEADER = ['k', 'residual_sq', 'consensus_gap', 'dual_max_dist']


def safe_filename(filename):
    """Replace path separators and shell-hostile characters with underscores."""
    filename = filename.strip()
    for char in ['/', '\\', ':', '*', '?', '"', '<', '>', '|', ' ']:
        filename = filename.replace(char, '_')
    while '__' in filename:
        filename = filename.replace('__', '_')
    return filename


def ensure_parent(path):
    """Create the parent directory of path if needed."""
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    return path


def create_result_dir(problem_name):
    """
    Create a result directory for a solve.
    Format: {problem}_{YYYYMMDD_HHMMSS}/
    """
    timestamp = datetime.now().strftime('%Y%m%d_%H%M%S')
    result_path = os.path.join(config.RESULTS_DIR, f"{safe_filename(problem_name)}_{timestamp}")
    os.makedirs(result_path, exist_ok=True)
    return result_path


def resolve_problem_path(path):
    """Return path as given if it exists, else look it up under PROBLEMS_DIR."""
    if os.path.isfile(path):
        return path
    candidate = os.path.join(config.PROBLEMS_DIR, path)
    if os.path.isfile(candidate):
        return candidate
    return path


def save_params(result_dir, params):
    """Save run parameters to params.json in the result directory."""
    params_file = os.path.join(result_dir, 'params.json')
    with open(params_file, 'w', encoding='utf-8') as f:
        json.dump(params, f, indent=2, sort_keys=True)
    return params_file


def _fmt(value):
    return config.CSV_FLOAT_FORMAT % value


def write_trace_csv(rows, path):
    """
    Write trace rows (k, residual_sq, consensus_gap, dual_max_dist) as CSV.

    Floats use 17 significant digits so every double round-trips; a missing
    dual distance is written as an empty field.
    """
    ensure_parent(path)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(TRACE_HEADER)
        for k, residual_sq, gap, dual in rows:
            writer.writerow([str(int(k)), _fmt(residual_sq), _fmt(gap),
                             '' if dual is None else _fmt(dual)])
    return path


def write_jsonl(records, path):
    """Write one JSON object per line."""
    ensure_parent(path)
    with open(path, 'w', encoding='utf-8') as f:
        for record in records:
            f.write(json.dumps(record, sort_keys=True))
            f.write('\n')
    return path


def write_json(payload, path):
    ensure_parent(path)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(payload, f, indent=2, sort_keys=True)
    return path
