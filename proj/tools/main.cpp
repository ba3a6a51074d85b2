#include <cstdio>

int main() {
  std::puts("radjudge: CLI not wired up yet");
  return 1;
}
