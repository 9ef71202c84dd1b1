double myTable[130][130], myTableOut[130][130];

int main()
{
    int i, j;
    double diffsum = 0.0;
    for (i = 0; i < 130; i++) {
        for (j = 0; j < 130; j++) {
            myTable[i][j] = (i * 7 + j * 3) % 11;
            myTableOut[i][j] = (i + j * 5) % 13;
        }
    }
#pragma omp parallel for reduction(+:diffsum) shared(myTable) check
    for (i = 1; i < (1 + 128 + 1) - 1; i++) {
        for (j = 1; j < (1 + 128 + 1) - 1; j++) {
            double diff = myTableOut[i][j] - myTable[i][j];
            double diffmul = diff * diff;
            diffsum += diffmul;
            myTable[i][j] = myTableOut[i][j];
        }
    }
    printf("%.17g %.17g\n", diffsum, myTable[5][7]);
    return 0;
}
