#include "tml/parallel.hpp"

#include <cstdlib>
#include <string>

namespace tml {

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("TMLAB_THREADS")) {
        try {
            int k = std::stoi(env);
            if (k > 0) return k;
        } catch (...) {
        }
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace tml
