// snippet B0
device_global<int, decltype(properties{device_image_scope})> scoped;

int main() {
  queue q;
  int output = 0;
  q.single_task([=]() { scoped = 5; }).wait();
  q.memcpy(&output, scoped).wait();
  std::cout << "Output value from device kernel: " << output << std::endl;
  return 0;
}
