package com.google.javascript.jscomp;

import java.util.ArrayList;
import java.util.List;

/**
 * Emits JavaScript source text piece by piece.
 */
abstract class CodeConsumer {

    private char lastChar = '\0';
    private final List<String> pieces = new ArrayList<>();

    abstract void append(String str);

    char getLastChar() {
        return lastChar;
    }

    void add(String newcode) {
        if (newcode.isEmpty()) {
            return;
        }
        append(newcode);
        pieces.add(newcode);
        lastChar = newcode.charAt(newcode.length() - 1);
    }

    void addNumber(double x) {
        char prev = getLastChar();
        if (x < 0 && prev == '-') {
            add(" ");
        }
        if ((long) x == x) {
            long value = (long) x;
            add(Long.toString(value));
        } else {
            add(Double.toString(x));
        }
    }

    static boolean isNegativeZero(double x) {
        return x == 0.0 && 1 / x < 0;
    }

    int pieceCount() {
        int count = 0;
        for (String piece : pieces) {
            if (!piece.isEmpty()) {
                count++;
            }
        }
        return count;
    }
}
