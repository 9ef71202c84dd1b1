int g(int &a, int b)
{
    int r = 2;
    int c = 1;
    a = a + r * 2;
    int ret = a + b + c + r * 2;
    return ret;
}

int f(int a)
{
    return a + 1;
}

int main()
{
    int l;
    int x = 2;
    l = f(1) + f(2) + g(x, 6);
    l = l * g(x, 2);
    printf("%d %d\n", l, x);
    return l;
}
