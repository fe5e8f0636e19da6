"""Runs fixture tests by translating Java-subset methods to C++.

The harness extracts the named methods from a Java file, rewrites the
handful of surface differences the fixtures rely on, splices them into a
support header and compiles the result with g++. Each test runs in its own
process and reports one protocol line: TEST <name> PASS|FAIL|ERROR.
"""

import os
import re
import subprocess
import sys
import tempfile

_MODIFIERS = re.compile(r"\b(public|private|protected|final|abstract)\s+")
_STATIC_REF = re.compile(r"\b([A-Z]\w*)\.(?=[A-Za-z_])")
_MEMBER_REF = re.compile(r"\b([a-z_]\w*)\.(?=[A-Za-z_])")
_LITERALS = re.compile(r'"(?:\\.|[^"\\])*"|\'(?:\\.|[^\'\\])*\'')


def _mask_literals(text):
    return _LITERALS.sub(lambda m: " " * len(m.group(0)), text)


def extract_method(text, name):
    masked = _mask_literals(text)
    decl = re.compile(r"^[ \t]*[\w<>\[\], ?]*\b" + re.escape(name) + r"\s*\([^;{}]*\)[^;{}]*\{", re.M)
    m = decl.search(masked)
    if not m:
        raise ValueError("method not found: " + name)
    depth = 0
    for i in range(m.end() - 1, len(masked)):
        c = masked[i]
        if c == "{":
            depth += 1
        elif c == "}":
            depth -= 1
            if depth == 0:
                return text[m.start():i + 1]
    raise ValueError("unterminated method: " + name)


def translate(java):
    pieces = []
    last = 0
    for lit in _LITERALS.finditer(java):
        pieces.append(_translate_code(java[last:lit.start()]))
        pieces.append(lit.group(0))
        last = lit.end()
    pieces.append(_translate_code(java[last:]))
    return "".join(pieces)


def _translate_code(code):
    code = _MODIFIERS.sub("", code)
    code = re.sub(r"\bboolean\b", "bool", code)
    code = re.sub(r"\bnull\b", "nullptr", code)
    code = _STATIC_REF.sub(r"\1::", code)
    code = _MEMBER_REF.sub(r"\1->", code)
    return code


def run(java_file, methods, harness_dir, tests, timeout=20):
    here = os.path.abspath(harness_dir)
    with open(java_file, encoding="utf-8") as f:
        source = f.read()
    try:
        body = "\n".join(translate(extract_method(source, name)) for name in methods)
    except ValueError as e:
        print("harness: " + str(e), file=sys.stderr)
        return 1
    with tempfile.TemporaryDirectory() as tmp:
        with open(os.path.join(tmp, "extracted.inc"), "w", encoding="utf-8") as f:
            f.write(body + "\n")
        exe = os.path.join(tmp, "suite")
        cmd = ["g++", "-std=c++17", "-O0", "-w", "-I", tmp, "-I", here,
               os.path.join(here, "tests.cpp"), "-o", exe]
        built = subprocess.run(cmd, capture_output=True, text=True)
        if built.returncode != 0:
            sys.stderr.write(built.stderr)
            return 1
        for name in tests:
            try:
                proc = subprocess.run([exe, name], capture_output=True, text=True, timeout=timeout)
            except subprocess.TimeoutExpired:
                print("TEST %s ERROR" % name, flush=True)
                continue
            line = proc.stdout.strip().splitlines()
            if proc.returncode == 0 and line and line[-1] in ("PASS", "FAIL"):
                print("TEST %s %s" % (name, line[-1]), flush=True)
            else:
                print("TEST %s ERROR" % name, flush=True)
    return 0
