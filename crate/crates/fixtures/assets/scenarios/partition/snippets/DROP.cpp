// snippet DROP
int main() {
  queue q;
  q.single_task([=]() { missing = 1; }).wait();
  return 0;
}
