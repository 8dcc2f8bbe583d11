#include <sycl/sycl.hpp>
#include <array>
#include <iostream>
#include <string>
#if FPGA_HARDWARE || FPGA_EMULATOR || FPGA_SIMULATOR
#include <sycl/ext/intel/fpga_extensions.hpp>
#endif

using namespace sycl;
using namespace sycl::ext::oneapi::experimental;

// Define a device_global variable with a unique identifier
device_global<int> myGlobalVar;

// Optionally, define another device_global variable
with the device_image_scope property
device_global<float, decltype(properties{device_image_scope})> myScopedVar;

class MyKernel;

void device_kernel_function(queue &q, int &output) {
  // Submit a kernel that uses the device_global variables
  q.submit([&](handler &h) {
    h.single_task<MyKernel>([=]() {
      // Access the device_global variables within the kernel
      int val = myGlobalVar;
      float scopedVal = myScopedVar;
      // Perform computations...
      myGlobalVar = val + 1; // Increment the global variable
      myScopedVar = scopedVal + 1.0f; // Increment the scoped variable
    });
  }).wait(); // Wait for the kernel to complete execution

  // Retrieve the computed values from the device_global variables
  output = myGlobalVar;
}

int main() {
  queue q;
  int output = 0;
  device_kernel_function(q, output);

  // Print the output value of the computation occurring in the device kernel
  std::cout << "Output value from device kernel: " << output << std::endl;

  return 0;
}
