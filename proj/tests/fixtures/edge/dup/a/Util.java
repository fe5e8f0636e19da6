package demo.a;

public class Util {
    static int twice(int x) {
        return x * 2;
    }
}
