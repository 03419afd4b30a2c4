#include <cstdio>

int main() {
  std::puts("trigal: placeholder");
  return 0;
}
