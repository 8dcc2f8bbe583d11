// snippet C0
using namespace sycl::ext::oneapi::experimental;

device_global<int, decltype(properties{device_image_scope})> scoped;
device_global<int> plain;

int main() {
  queue q;
  buffer<int> out{range<1>{2}};
  q.submit([&](handler &h) {
    h.parallel_for(range<1>{2}, [=](id<1> i) { acc[i] = scoped + plain; });
  }).wait();
  host_accessor host{out};
  std::cout << "Output value from device kernel: " << host[0] << std::endl;
  return 0;
}
