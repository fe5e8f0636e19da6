import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
import jsub

TESTS = ["finally_edge_is_exceptional", "follow_sibling", "follow_parent_sibling", "function_end_is_null"]

if __name__ == "__main__":
    sys.exit(jsub.run("src/com/google/javascript/jscomp/ControlFlowAnalysis.java", ["computeFollowNode"],
                      os.path.dirname(os.path.abspath(__file__)), TESTS))
