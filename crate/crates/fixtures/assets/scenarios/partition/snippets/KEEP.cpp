// snippet KEEP
int main() {
  queue q;
  int output = 0;
  q.single_task([=]() {}).wait();
  std::cout << "Output value from device kernel: " << output << std::endl;
  return 0;
}
