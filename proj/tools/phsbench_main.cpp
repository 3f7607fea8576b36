#include <cstdio>

int main() {
  std::puts("phsbench: CLI under construction");
  return 0;
}
