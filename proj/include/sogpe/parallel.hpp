#pragma once

namespace sogpe {

/// Worker count for element loops. Defaults to the SOGPE_THREADS environment
/// variable, or 1 when it is unset. Results do not depend on this value.
int thread_count();
void set_thread_count(int n);

}  // namespace sogpe
