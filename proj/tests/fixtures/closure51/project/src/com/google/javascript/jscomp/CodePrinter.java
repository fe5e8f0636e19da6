package com.google.javascript.jscomp;

import java.util.List;

class CodePrinter extends CodeConsumer {

    private final StringBuilder sb = new StringBuilder();

    @Override
    void append(String str) {
        sb.append(str);
    }

    void printNumbers(List<Double> numbers) {
        int index = 0;
        while (index < numbers.size()) {
            double number = numbers.get(index);
            addNumber(number);
            index = index + 1;
        }
    }

    String result() {
        String text = sb.toString();
        return text;
    }
}
