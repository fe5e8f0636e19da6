#include <cmath>
#include <cstdio>
#include <cstring>
#include <iomanip>
#include <sstream>
#include <string>

using String = std::string;

struct Long {
    static String toString(long v) { return std::to_string(v); }
};

struct Double {
    // Java's rendering for the values the tests use.
    static String toString(double v) {
        std::ostringstream os;
        if (std::floor(v) == v && std::fabs(v) < 1e7) {
            os << std::fixed << std::setprecision(1) << v;
        } else {
            os << std::setprecision(17) << v;
        }
        return os.str();
    }
};

struct CodeConsumer {
    String out;

    char getLastChar() { return out.empty() ? '\0' : out.back(); }
    void add(const String& s) { out += s; }
    static bool isNegativeZero(double x) { return x == 0.0 && std::signbit(x); }

#include "extracted.inc"
};

static bool negative_zero() {
    CodeConsumer c;
    c.addNumber(-0.0);
    return c.out == "-0.0";
}
static bool integral_value() {
    CodeConsumer c;
    c.addNumber(5.0);
    return c.out == "5";
}
static bool fraction() {
    CodeConsumer c;
    c.addNumber(2.5);
    return c.out == "2.5";
}
static bool space_after_minus() {
    CodeConsumer c;
    c.add("x-");
    c.addNumber(-3.0);
    return c.out == "x- -3";
}

int main(int argc, char** argv) {
    struct { const char* name; bool (*fn)(); } tests[] = {
        {"negative_zero", negative_zero},
        {"integral_value", integral_value},
        {"fraction", fraction},
        {"space_after_minus", space_after_minus},
    };
    for (auto& t : tests) {
        if (argc > 1 && std::strcmp(argv[1], t.name) == 0) {
            std::puts(t.fn() ? "PASS" : "FAIL");
            return 0;
        }
    }
    return 2;
}
