#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

int main(int argc, char** argv) {
  doctest::Context context;
  // Never trap into a debugger on failure; sandboxes often look like one.
  context.setOption("no-breaks", true);
  context.applyCommandLine(argc, argv);
  return context.run();
}
