#include <cstdio>
int main() { std::puts("cellbf: placeholder"); return 0; }
