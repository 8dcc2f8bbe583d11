// snippet B2
using namespace sycl::ext::oneapi::experimental;

device_global<int, decltype(properties{device_image_scope})> scoped;
device_global<int> plain;

int main() {
  queue q;
  int output = 0;
  q.single_task([=]() { scoped = 5; plain = scoped; }).wait();
  q.memcpy(&output, plain).wait();
  std::cout << "Output value from device kernel: " << output << std::endl;
  return 0;
}
