package geometry;

class Bits {
    static int pack(int a, int b) {
        return (a << 16) ^ (b & 0xFFFF); // two halves
    }

    static int unpackHigh(int v) { return v >> 16; }

    static void flip(int[] a) { a[0] ^= ~a[0]; a[1] <<= 1; a[2] >>= 1; }
}
