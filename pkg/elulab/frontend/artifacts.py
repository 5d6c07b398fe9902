import csv
import io
import json
import logging
import os
import tempfile

log = logging.getLogger("elulab")
log.trace("artifacts.py")

def write_atomic(path, data):
    """Write bytes or text to path through a temporary file renamed in place

    The temporary file lives in the destination directory so the rename
    never crosses a filesystem.
    """
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    if isinstance(data, str):
        data = data.encode("utf-8")
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    log.debug(f"wrote {path} ({len(data)} bytes)")
    return path

def csv_text(rows):
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    for row in rows:
        writer.writerow(row)
    return out.getvalue()

def write_csv(path, rows):
    """rows: iterable of lists, header first"""
    return write_atomic(path, csv_text(rows))

def write_json(path, obj):
    return write_atomic(path, json.dumps(obj, indent=4, ensure_ascii=False) + "\n")

def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.reader(f))
