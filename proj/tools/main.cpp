#include <cstdio>

int main() {
    std::puts("bilever: placeholder");
    return 0;
}
