// snippet A2
using namespace sycl::ext::oneapi::experimental;

device_global<int> counter;
device_global<float, decltype(properties{device_image_scope})> scaled;

class First;
class Second;

int main() {
  queue q;
  int output = 0;
  q.single_task<First>([=]() {
#pragma unroll
    for (int i = 0; i < 4; ++i)
      counter = counter + 1;
  }).wait();
  q.single_task<Second>([=]() { scaled = counter * 0.5f; }).wait();
  q.memcpy(&output, counter).wait();
  std::cout << "Output value from device kernel: " << output / 2 << std::endl;
  return 0;
}
