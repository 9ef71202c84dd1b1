double myTable[130][130], myTableOut[130][130];

void init(double t[130][130], double o[130][130])
{
    int i, j;
    for (i = 0; i < 130; i++) {
        for (j = 0; j < 130; j++) {
            t[i][j] = ((i * 37 + j * 11) % 101) / 10.0;
            o[i][j] = 0.0;
        }
    }
}

void displayRegion(double t[130][130])
{
    int i;
    double s = 0.0;
    for (i = 0; i < 130; i++) {
        s = s + t[i][i] + t[i][130 - 1 - i];
    }
    printf("region %.17g\n", s);
}

int main()
{
    int index = 0;
    double theDiffNorm = 1;
    double RefDiffNorm = 0;
    int iterations = 10;
    int i, j, o, a;
    double diffsum, diff, diffmul;
    init(myTable, myTableOut);
    for (index = 0; (index < iterations); index++) {
#pragma omp parallel for shared(myTableOut) fixed(9, 3, 0)
        for (i = 1; i < 128 + 1; i++) {
            for (j = 1; j < 128 + 1; j++) {
                double neighbor = cos(myTable[i - 1][j]) + sin(myTable[i][j - 1]) + sin(myTable[i][j + 1]) + cos(myTable[i + 1][j]);
                myTableOut[i][j] = neighbor / 3;
            }
        }
        theDiffNorm = 0.0;
        diffsum = theDiffNorm;
#pragma omp parallel for reduction(+:diffsum) shared(myTable) check
        for (i = 1; i < (1 + 128 + 1) - 1; i++) {
            for (j = 1; j < (1 + 128 + 1) - 1; j++) {
                diff = myTableOut[i][j] - myTable[i][j];
                diffmul = diff * diff;
                diffsum += diffmul;
                myTable[i][j] = myTableOut[i][j];
            }
        }
        theDiffNorm = diffsum;
    }
    displayRegion(myTable);
    printf("theDiffNorm:%.17g RefDiffNorm:%.17g\n", theDiffNorm, RefDiffNorm);
    return 0;
}
