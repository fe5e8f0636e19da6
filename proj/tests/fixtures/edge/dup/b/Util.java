package demo.b;

class Util {
    static int thrice(int x) {
        return x * 3;
    }
}
