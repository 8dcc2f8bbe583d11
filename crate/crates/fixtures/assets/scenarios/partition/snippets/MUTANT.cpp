// snippet MUTANT
int main() {
  queue q;
  int output = 1;
  q.single_task([=]() {}).wait();
  std::cout << "Output value from device kernel: " << output << std::endl;
  return 0;
}
