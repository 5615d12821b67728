#include <cstdio>

int main() {
  std::puts("crsing: placeholder");
  return 0;
}
